import numpy as np
import pytest

from magtunnel.band import (
    BandError,
    BandTable,
    Grid1D,
    assemble_montgomery,
    band_hessian,
    band_holomorphic,
    build_band_table,
    complex_eigenpair,
    default_grid,
    fh_derivative,
    lowest_real_eigs,
    potential_operator,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(8.0, 8)
    with pytest.raises(ValueError):
        Grid1D(-1.0, 100)
    g = Grid1D(8.0, 3201)
    assert g.spacing == pytest.approx(16.0 / 3200)
    assert g.refined().n == 6401
    assert g.refined().spacing == pytest.approx(g.spacing / 2)


def test_assemble_potential_at_origin():
    g = Grid1D(2.0, 65)
    # potential at tau = 0 equals xi^2
    for xi, expect in ((0.0, 0.0), (2.0, 4.0)):
        op = assemble_montgomery(1, xi, g)
        mid = (g.n - 2) // 2
        assert op.main[mid] - 2.0 / g.spacing ** 2 == pytest.approx(expect, abs=1e-12)


def test_assemble_hand_stencil():
    # smallest admissible grid; entries checked against the hand-computed
    # 3-point stencil rows (grids below 16 points are rejected by contract)
    g = Grid1D(2.0, 17)
    op = assemble_montgomery(1, 0.0, g)
    a = op.toarray()
    dt = 0.25
    tau = -2.0 + dt * np.arange(1, 16)
    pot = (0.0 - tau ** 2 / 2) ** 2
    expect = (np.diag(2.0 / dt ** 2 + pot)
              + np.diag(np.full(14, -1.0 / dt ** 2), 1)
              + np.diag(np.full(14, -1.0 / dt ** 2), -1))
    assert np.allclose(a, expect)
    # second-difference row sums vanish against constants away from the ends
    ones = np.ones(15)
    row_sums = a @ ones - pot
    assert np.allclose(row_sums[1:-1], 0.0, atol=1e-9)


def test_assemble_rejects_bad_inputs():
    g = Grid1D(4.0, 65)
    with pytest.raises(ValueError):
        assemble_montgomery(1, np.nan, g)
    with pytest.raises(ValueError):
        assemble_montgomery(1, 0.3, g, gamma_scale=0.0)
    with pytest.raises(ValueError):
        assemble_montgomery(0, 0.3, g)


def test_harmonic_oracle():
    g = Grid1D(10.0, 4001)
    op = potential_operator(g.tau ** 2, g)
    vals, vecs = lowest_real_eigs(op, 3)
    assert np.allclose(vals, [1.0, 3.0, 5.0], atol=5e-6)
    # normalization and sign convention
    w = vecs[:, 0]
    assert g.spacing * np.sum(w ** 2) == pytest.approx(1.0, abs=1e-12)
    assert w[w.size // 2] > 0


def test_even_k_symmetry_bruteforce():
    # for k = 2 the potential is even under (t, xi) -> (-t, -xi)
    g = Grid1D(6.0, 801)
    for xi in (0.3, 0.7):
        va, _ = lowest_real_eigs(assemble_montgomery(2, xi, g), 3)
        vb, _ = lowest_real_eigs(assemble_montgomery(2, -xi, g), 3)
        assert np.allclose(va, vb, atol=1e-12)


def test_too_many_eigenvalues_rejected():
    g = Grid1D(2.0, 18)
    op = assemble_montgomery(1, 0.0, g)
    with pytest.raises(ValueError):
        lowest_real_eigs(op, op.dim + 1)


def test_bracket_failure():
    g = Grid1D(6.0, 401)
    with pytest.raises(BandError, match="bracket"):
        build_band_table(1, (2.0, 4.0), g, n_samples=11)


def test_band_table_k1(band_k1):
    assert band_k1.nu0 > 0
    assert band_k1.nu0_dd > 0
    assert np.all(band_k1.nu2_values > band_k1.nu1_values)
    # minimum attained nearest xi0
    i = int(np.argmin(band_k1.nu1_values))
    assert abs(band_k1.xi_samples[i] - band_k1.xi0) <= np.diff(band_k1.xi_samples)[0]


def test_band_table_k2_even(band_k2):
    assert abs(band_k2.xi0) < 1e-8


def test_holomorphic_center_and_schwarz(band_k1):
    assert band_holomorphic(band_k1, band_k1.xi0) == pytest.approx(band_k1.nu0)
    z = band_k1.xi0 + 0.05 + 0.08j
    assert band_holomorphic(band_k1, np.conj(z)) == pytest.approx(
        np.conj(band_holomorphic(band_k1, z)), abs=1e-14
    )


def test_holomorphic_radius_guard(band_k1):
    with pytest.raises(BandError, match="extension domain"):
        band_holomorphic(band_k1, band_k1.xi0 + 2.0 * band_k1.taylor_radius)


def test_holomorphic_vs_eigensolve(band_k1):
    model = band_k1.model()
    for z in (band_k1.xi0 + 0.1, band_k1.xi0 + 0.12j, band_k1.xi0 + 0.08 - 0.07j):
        model.reset_sweep("t")
        nu_eig = model.nu_complex(z, seed_key="t")
        assert abs(band_holomorphic(band_k1, z) - nu_eig) < 1e-6


def test_quadratic_imaginary_expansion(band_k1):
    y = 0.03
    model = band_k1.model()
    model.reset_sweep("t")
    nu = model.nu_complex(band_k1.xi0 + 1j * y, seed_key="t")
    quad = band_k1.nu0 - band_k1.nu0_dd * y ** 2 / 2
    assert abs(nu - quad) < 30 * y ** 4


def test_complex_eigenpair_real_case(band_k1):
    g = band_k1.grid
    pair = complex_eigenpair(1, band_k1.xi0, 1.0, g)
    assert pair.eigenvalue.imag == pytest.approx(0.0, abs=1e-10)
    # the coarse-grid eigenvalue differs from the extrapolated table value at O(dx^2)
    assert pair.eigenvalue.real == pytest.approx(band_k1.nu0, abs=1e-5)
    assert np.abs(pair.samples.imag).max() < 1e-8
    assert pair.bilinear_norm == pytest.approx(1.0, abs=1e-10)


def test_complex_eigenpair_bilinear_norm(band_k1):
    pair = complex_eigenpair(1, band_k1.xi0 + 0.1j, 1.0, band_k1.grid)
    assert abs(pair.bilinear_norm - 1.0) < 1e-10
    assert pair.gap_to_second > 0.1


def test_feynman_hellmann_identity(band_k1):
    """Bilinear FH integral equals the numerical derivative of the eigenvalue."""
    model = band_k1.model()
    rng = np.random.default_rng(3)
    for xi in band_k1.xi0 + rng.uniform(-0.3, 0.5, size=4):
        model.reset_sweep("fh")
        _, dnu = model.nu_complex(complex(xi), seed_key="fh", with_derivative=True)
        eps = 1e-4
        num = (model.nu_real(xi + eps) - model.nu_real(xi - eps)) / (2 * eps)
        assert abs(dnu - num) < 1e-6


def test_fh_complex_argument(band_k1):
    model = band_k1.model()
    z = band_k1.xi0 + 0.02 + 0.09j
    model.reset_sweep("fhc")
    _, dnu = model.nu_complex(z, seed_key="fhc", with_derivative=True)
    eps = 1e-5
    model.reset_sweep("fhc2")
    num = (model.nu_complex(z + eps, seed_key="fhc2")
           - model.nu_complex(z - eps, seed_key="fhc2")) / (2 * eps)
    assert abs(dnu - num) < 1e-6


def test_band_hessian_form(band_k1):
    H = band_hessian(band_k1, gamma0=1.0, gamma_dd=1.0)
    assert H[0, 1] == 0.0 and H[1, 0] == 0.0
    assert H[0, 0] == pytest.approx((2.0 / 3.0) * band_k1.nu0)
    assert H[1, 1] == pytest.approx(band_k1.nu0_dd)
    with pytest.raises(ValueError):
        band_hessian(band_k1, gamma0=1.0, gamma_dd=0.0)
    with pytest.raises(ValueError):
        band_hessian(band_k1, gamma0=-1.0, gamma_dd=1.0)


def test_grid_refinement_convergence():
    """Halving the spacing moves nu0 by less than 4x the Richardson estimate."""
    coarse = Grid1D(8.0, 801)
    fine = Grid1D(8.0, 1601)
    tab_c = build_band_table(1, (0.0, 1.0), coarse, n_samples=15)
    tab_f = build_band_table(1, (0.0, 1.0), fine, n_samples=15)
    # both are extrapolated; their difference estimates the residual error
    ref = build_band_table(1, (0.0, 1.0), Grid1D(8.0, 3201), n_samples=15)
    err_c = abs(tab_c.nu0 - ref.nu0)
    err_f = abs(tab_f.nu0 - ref.nu0)
    assert err_f < err_c / 4 + 1e-12


def test_serialization_roundtrip(band_k1):
    blob = band_k1.dumps()
    back = BandTable.loads(blob)
    assert back.xi0 == band_k1.xi0
    assert back.nu0 == band_k1.nu0
    assert back.nu0_dd == band_k1.nu0_dd
    assert np.array_equal(back.taylor_coeffs, band_k1.taylor_coeffs)
    assert back.dumps() == blob


def test_version_mismatch_rejected(band_k1):
    d = band_k1.to_dict()
    d["version"] = "other"
    with pytest.raises(BandError, match="version"):
        BandTable.from_dict(d)


def test_default_grid_tail_mass():
    # harmonic-approximation ground state mass outside the box is negligible
    g = default_grid(1)
    tau = g.tau
    w = np.exp(-tau ** 2 / 2)
    outside = 1.0 - np.trapezoid(w ** 2, tau) / np.sqrt(np.pi)
    assert outside < 1e-14
