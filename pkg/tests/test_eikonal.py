import math

import numpy as np
import pytest

from magtunnel.eikonal import (
    agmon_distances,
    decay_profile,
    eikonal_lower_bound_report,
    f_profile,
    solve_eikonal,
)
from magtunnel.errors import SolverError


def test_residual_bound(band_k1, corpus_eikonal):
    right, left, dist, diag = corpus_eikonal
    assert right.residual_max <= 1e-10 * band_k1.nu0
    assert left.residual_max <= 1e-10 * band_k1.nu0


def test_f_profile_constant_gamma():
    sigma = np.linspace(-1, 1, 11)
    f = f_profile(sigma, 0.0, np.full(11, 2.0), 2.0, 0.57, 1)
    assert np.all(f == 0.0)


def test_f_profile_sign_and_value():
    sigma = np.array([-1.0, 1.0])
    gamma = np.array([2.0, 2.0])
    f = f_profile(sigma, 0.0, gamma, 1.0, 0.57, 1)
    # sign follows sigma - s_well
    assert f[0] < 0 < f[1]
    expect = math.sqrt(0.57) * math.sqrt(1 - 2.0 ** (-2.0 / 3.0))
    assert f[1] == pytest.approx(expect, rel=1e-12)


def test_f_profile_rejects_gamma_below_minimum():
    with pytest.raises(SolverError, match="gamma"):
        f_profile(np.array([0.5]), 0.0, np.array([0.9]), 1.0, 0.57, 1)


def test_phi_zero_at_well(corpus_eikonal):
    right = corpus_eikonal[0]
    assert right.phi[right.well_index] == 0.0
    assert right.Phi[right.well_index] == 0.0


def test_phi_slope_matches_lemma(band_k1, corpus_profile, corpus_eikonal):
    right = corpus_eikonal[0]
    slope = right.phi_slope_at_well()
    lemma = math.sqrt((2.0 / 3.0) * corpus_profile.gamma_dd * band_k1.nu0
                      / (corpus_profile.gamma0 * band_k1.nu0_dd))
    assert abs(slope.real - lemma) / lemma < 1e-5
    assert abs(slope.imag) < 1e-8


def test_agmon_positive_and_curvature(band_k1, corpus_profile, corpus_eikonal):
    right = corpus_eikonal[0]
    assert np.min(right.Phi) >= -1e-12
    phidd = right.Phi_second_derivative_at_well()
    zeta = math.sqrt((2.0 / 3.0) * corpus_profile.gamma_dd * band_k1.nu0
                     / (corpus_profile.gamma0 ** (1.0 / 3.0) * band_k1.nu0_dd))
    assert phidd == pytest.approx(zeta, rel=1e-5)
    # Phi''(s_r) = gamma0^(1/3) phi'(s_r)
    assert phidd == pytest.approx(
        corpus_profile.gamma0 ** (1.0 / 3.0) * right.phi_slope_at_well().real, rel=1e-6)


def test_agmon_distances_symmetric(corpus_eikonal):
    right, left, dist, diag = corpus_eikonal
    assert abs(dist.S_u - dist.S_d) < 1e-8
    assert dist.S == min(dist.S_u, dist.S_d)
    assert not diag["warn"]


def test_agmon_distances_asymmetric(corpus_eikonal_asym):
    right, left, dist, diag = corpus_eikonal_asym
    assert dist.S_u != pytest.approx(dist.S_d, abs=1e-4)
    assert dist.S == min(dist.S_u, dist.S_d)
    # the x2^3 > 0 bump raises gamma on the arc through sigma = 0 (top)
    assert dist.S_u > dist.S_d


def test_constant_gamma_limit(band_k1, const_gamma_profile):
    sol = solve_eikonal(const_gamma_profile, band_k1, "right", target_h=0.05)
    assert np.abs(sol.phi).max() < 1e-9
    assert np.abs(sol.Phi).max() < 1e-9
    # g is exactly linear: gamma0^(1/3) xi0 sigma
    expect = const_gamma_profile.gamma0 ** (1.0 / 3.0) * band_k1.xi0 * sol.sigma
    assert np.abs(sol.g - expect).max() < 1e-9


def test_w_definition_identity(band_k1, corpus_eikonal):
    right = corpus_eikonal[0]
    lhs = right.gamma_vals ** (-1.0 / 3.0) * right.w
    rhs = band_k1.xi0 + 1j * right.phi
    assert np.abs(lhs - rhs).max() < 1e-10


def test_w_at_well(band_k1, corpus_profile, corpus_eikonal):
    right = corpus_eikonal[0]
    expect = corpus_profile.gamma0 ** (1.0 / 3.0) * band_k1.xi0
    assert abs(right.w[right.well_index] - expect) < 1e-9


def test_im_w_equals_Phi_prime(corpus_eikonal):
    right = corpus_eikonal[0]
    iw = right.well_index
    h = right.sigma[iw + 1] - right.sigma[iw]
    seg = slice(iw, None)
    Phi_prime = np.gradient(right.Phi[seg], h)
    # interior points only (gradient end formulas are first order)
    err = np.abs(np.imag(right.w[seg]) - Phi_prime)[2:-2].max()
    assert err < 1e-4  # limited by the 2nd-order numerical derivative of Phi
    # analytic route: Im w = gamma^(1/3) Re phi exactly
    assert np.abs(np.imag(right.w) - right.gamma_vals ** (1 / 3.0) * right.phi.real).max() < 1e-12


def test_left_right_symmetry(corpus_eikonal):
    right, left, _, _ = corpus_eikonal
    assert np.abs(left.f_vals - (-right.f_vals[::-1])).max() < 1e-12
    assert np.abs(left.phi - (-np.conj(right.phi[::-1]))).max() < 1e-9


def test_decay_profile_even(corpus_eikonal):
    right, left, _, _ = corpus_eikonal
    sigma, D, imag = decay_profile(right, left)
    # D is nonnegative and even in sigma for the symmetric corpus
    assert D.min() > -1e-12
    assert np.abs(D - D[::-1]).max() < 1e-9
    assert np.abs(imag - imag[::-1]).max() < 1e-9


def test_monotone_dependence(band_k1, corpus_profile, corpus_eikonal):
    """Scaling (gamma - gamma0) up cannot decrease the Agmon distances."""
    _, _, dist0, _ = corpus_eikonal

    class Scaled:
        L = corpus_profile.L
        gamma0 = corpus_profile.gamma0
        s_r = corpus_profile.s_r
        s_l = corpus_profile.s_l

        def gamma_at(self, s):
            g = corpus_profile.gamma_at(s)
            return corpus_profile.gamma0 + 1.2 * (g - corpus_profile.gamma0)

    prof = Scaled()
    r = solve_eikonal(prof, band_k1, "right", target_h=0.04)
    l = solve_eikonal(prof, band_k1, "left", target_h=0.04)
    dist1, _ = agmon_distances(r, l)
    assert dist1.S_u >= dist0.S_u
    assert dist1.S_d >= dist0.S_d


def test_quadrature_refinement_order(band_k1, corpus_profile):
    """S converges at 4th order under grid refinement (dense-grid oracle)."""
    vals = {}
    for th in (0.04, 0.02, 0.01):
        r = solve_eikonal(corpus_profile, band_k1, "right", target_h=th)
        l = solve_eikonal(corpus_profile, band_k1, "left", target_h=th)
        d, _ = agmon_distances(r, l)
        vals[th] = d.S_u
    e1 = abs(vals[0.04] - vals[0.01])
    e2 = abs(vals[0.02] - vals[0.01])
    order = math.log(e1 / e2) / math.log(2.0)
    assert order > 3.0
    assert e2 < 1e-7


def test_lower_bound_report(corpus_eikonal, band_k1):
    right = corpus_eikonal[0]
    rep = eikonal_lower_bound_report(right)
    # recorded, not enforced: in the small-variability regime the left side
    # dominates pointwise
    margin = rep["Phi_prime"] - band_k1.nu0 * rep["rhs_without_nu0"]
    assert margin.min() > -1e-10


def test_csv_export(corpus_eikonal):
    right = corpus_eikonal[0]
    text = right.to_csv()
    lines = text.strip().split("\n")
    assert lines[0].startswith("s,f,re_phi,im_phi,Phi,g")
    assert len(lines) == right.sigma.size + 1
