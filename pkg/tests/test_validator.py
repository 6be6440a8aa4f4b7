import math

import numpy as np
import pytest
from scipy.linalg import eig_banded

from magtunnel.errors import SolverError
from magtunnel.validator import (
    DirectSpectrum,
    StripDiscretization,
    StripOperator,
    _tau_kinetic_bands,
    compare_report,
    discretize_strip,
    extend_single_well,
    lowest_eigs_hermitian,
    planar_direct,
    single_well_direct,
)


def _fiber_lowest(rho, gamma, tau_bands, dtau, n_tau, tau):
    kin_d, kin_o1, kin_o2 = tau_bands
    pot = (rho - gamma * tau ** 2 / 2) ** 2
    ab = np.zeros((3, n_tau))
    ab[0] = kin_d + pot
    ab[1, :-1] = kin_o1
    ab[2, :-2] = kin_o2
    return eig_banded(ab, lower=True, eigvals_only=True, select="i",
                      select_range=(0, 0))[0]


def test_separable_oracle():
    """Constant gamma, no jet/curvature/flux: the strip operator separates."""
    n_geo = 512
    gamma = np.full(n_geo, 1.1)
    disc = StripDiscretization(n_sigma=96, n_tau=120, T=5.0, h=0.15)
    op = StripOperator(disc, 1, math.pi, -math.pi, gamma, np.zeros(n_geo), beta0=0.0)
    spec, _ = lowest_eigs_hermitian(op, m=4, shift=0.5)
    bands = _tau_kinetic_bands(disc.n_tau, op.dtau)
    per_mode = sorted(
        _fiber_lowest(r, 1.1, bands, op.dtau, disc.n_tau, op.tau) for r in op.rho
    )
    assert np.allclose(spec.eigenvalues, per_mode[:4], atol=1e-10)


def test_hermiticity(corpus_profile):
    disc = StripDiscretization(n_sigma=96, n_tau=100, T=4.5, h=0.15)
    op = discretize_strip(corpus_profile, disc)
    assert op.is_real
    assert op.hermiticity_defect() < 1e-12


def test_flux_integer_shift_gauge(corpus_profile, corpus_constants):
    """Shifting beta0 by an integer flux quantum relabels modes only."""
    disc = StripDiscretization(n_sigma=128, n_tau=120, T=4.5, h=0.15)
    L = corpus_profile.L
    quantum = math.pi * disc.h ** 3 / L
    op1 = discretize_strip(corpus_profile, disc)
    op2 = discretize_strip(corpus_profile, disc, beta0=corpus_profile.beta0 + 3 * quantum)
    s1, _ = lowest_eigs_hermitian(op1, m=3, shift=0.8 * corpus_constants.delta10)
    s2, _ = lowest_eigs_hermitian(op2, m=3, shift=0.8 * corpus_constants.delta10)
    assert np.allclose(s1.eigenvalues, s2.eigenvalues, atol=1e-10)


def test_sigma_translation_gauge(corpus_profile, corpus_constants):
    """Rolling the profiles is a unitary relabeling; needs the complex path."""
    disc = StripDiscretization(n_sigma=128, n_tau=120, T=4.5, h=0.15)
    op1 = discretize_strip(corpus_profile, disc)
    roll = 37
    op2 = StripOperator(
        disc, corpus_profile.k, corpus_profile.L, -corpus_profile.L,
        np.roll(corpus_profile.gamma, roll), np.roll(corpus_profile.delta_tilde, roll),
        beta0=corpus_profile.beta0,
    )
    assert not op2.is_real
    assert op2.hermiticity_defect() < 1e-12
    s1, _ = lowest_eigs_hermitian(op1, m=2, shift=0.8 * corpus_constants.delta10)
    s2, _ = lowest_eigs_hermitian(op2, m=2, shift=0.8 * corpus_constants.delta10)
    assert np.allclose(s1.eigenvalues, s2.eigenvalues, atol=1e-9)


def test_tau_box_enlargement(corpus_profile, corpus_constants):
    h = 0.15
    # n chosen so both grids share the exact interior spacing 2T/(n+1)
    base = StripDiscretization(n_sigma=112, n_tau=139, T=4.4, h=h)
    big = StripDiscretization(n_sigma=112, n_tau=209, T=6.6, h=h)
    shift = 0.85 * corpus_constants.delta10
    s1, _ = lowest_eigs_hermitian(discretize_strip(corpus_profile, base), m=2, shift=shift)
    s2, _ = lowest_eigs_hermitian(discretize_strip(corpus_profile, big), m=2, shift=shift)
    # identical interior spacing, 1.5x box: only the truncated tails differ
    assert np.abs(s1.eigenvalues - s2.eigenvalues).max() < 1e-9


def test_mode_window_doubling(corpus_profile, corpus_constants):
    h = 0.15
    small = StripDiscretization(n_sigma=112, n_tau=140, T=4.4, h=h)
    large = StripDiscretization(n_sigma=224, n_tau=140, T=4.4, h=h)
    shift = 0.85 * corpus_constants.delta10
    s1, _ = lowest_eigs_hermitian(discretize_strip(corpus_profile, small), m=2, shift=shift)
    s2, _ = lowest_eigs_hermitian(discretize_strip(corpus_profile, large), m=2, shift=shift)
    assert np.abs(s1.eigenvalues - s2.eigenvalues).max() < 1e-8


def test_weighted_vs_flat_order_h(corpus_profile, corpus_constants):
    """The curvature metric changes eigenvalues at O(h).

    h is kept below 1/(T kappa_max) so the metric stays positive on the box
    (the weighted variant's stated precondition).
    """
    diffs = {}
    for h in (0.2, 0.1):
        disc_f = StripDiscretization(n_sigma=96, n_tau=110, T=4.4, h=h)
        disc_w = StripDiscretization(n_sigma=96, n_tau=110, T=4.4, h=h, weight_on=True)
        shift = 0.8 * corpus_constants.delta10
        sf, _ = lowest_eigs_hermitian(discretize_strip(corpus_profile, disc_f), m=2, shift=shift)
        sw, _ = lowest_eigs_hermitian(discretize_strip(corpus_profile, disc_w), m=2, shift=shift)
        diffs[h] = abs(sf.eigenvalues[0] - sw.eigenvalues[0])
    rate = math.log(diffs[0.2] / diffs[0.1]) / math.log(2.0)
    assert rate > 0.7
    assert diffs[0.1] < 0.1 * corpus_constants.delta10


def test_single_well_extension_validity(corpus_profile):
    profs = extend_single_well(corpus_profile, "right")
    g = profs["gamma"]
    assert g.min() == pytest.approx(corpus_profile.gamma0, abs=1e-6)
    assert g.max() == pytest.approx(profs["gamma_inf"], abs=1e-9)
    # kept arc reproduces the native profile at the right well
    sig = profs["sigma"]
    i = np.argmin(np.abs(sig - corpus_profile.s_r))
    assert g[i] == pytest.approx(corpus_profile.gamma0, abs=1e-6)
    # removed-well zone sits at the plateau
    j = np.argmin(np.abs(sig - corpus_profile.s_l))
    assert g[j] == pytest.approx(profs["gamma_inf"], rel=1e-9)


def test_single_well_gamma_inf_irrelevance(corpus_profile, band_k1):
    disc = StripDiscretization(n_sigma=144, n_tau=130, T=4.4, h=0.08)
    a = single_well_direct(corpus_profile, band_k1, disc, gamma_inf_factor=1.3, m=1)
    b = single_well_direct(corpus_profile, band_k1, disc, gamma_inf_factor=2.0, m=1)
    assert abs(a.eigenvalues[0] - b.eigenvalues[0]) < 1e-8


def test_direct_spectrum_conversion():
    spec = DirectSpectrum(h=0.1, k=1, eigenvalues=np.array([1.0, 2.0]),
                          residual_norms=np.zeros(2), midpoint_density=np.zeros(2),
                          outer_density=np.zeros(2))
    assert np.allclose(spec.lambda_equiv, 0.1 ** 4 * spec.eigenvalues)
    assert spec.gap == 1.0


def test_compare_report_needs_four_points(corpus_eikonal):
    _, _, dist, _ = corpus_eikonal
    with pytest.raises(SolverError, match="insufficient range"):
        compare_report([None] * 3, [None] * 3, dist)


def test_planar_gauge_shift(corpus_profile):
    """A polynomial gauge shift moves nothing but the eigenvector phases."""
    B = corpus_profile.field_spec
    base = planar_direct(B, 0.05, box_half=1.4, n_grid=120, m=2)

    def grad_chi(x):
        # chi = 0.4 x1^2 x2: grad = (0.8 x1 x2, 0.4 x1^2)
        return np.stack([0.8 * x[:, 0] * x[:, 1], 0.4 * x[:, 0] ** 2], axis=-1)

    shifted = planar_direct(B, 0.05, box_half=1.4, n_grid=120, m=2,
                            gauge_shift=grad_chi)
    assert np.abs(base - shifted).max() < 1e-8


def test_planar_landau_fixture():
    field = lambda x1, x2: np.ones_like(x1)
    vals = planar_direct(field, 0.05, box_half=1.5, n_grid=160, m=2)
    assert vals[0] == pytest.approx(0.05, rel=0.02)
