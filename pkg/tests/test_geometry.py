import math

import numpy as np
import pytest
from scipy.integrate import quad

from magtunnel.errors import AssumptionError, ConfigError
from magtunnel.geometry import (
    CurveSpec,
    FieldSpec,
    GeometryProfile,
    arclength_parametrize,
    build_geometry,
    circulation,
    curvature_profile,
    locate_wells,
    normal_jet,
    variability_check,
)

from conftest import SYMMETRIC_FIELD


def test_unit_circle_halflength(unit_circle):
    L, s, pts, tangents, amap = arclength_parametrize(unit_circle, 256)
    assert L == pytest.approx(math.pi, abs=1e-10)
    assert np.abs(np.hypot(*tangents.T) - 1.0).max() < 1e-10


def test_top_point_convention(unit_circle):
    _, s, pts, _, _ = arclength_parametrize(unit_circle, 256)
    mid = np.argmin(np.abs(s))
    assert pts[mid] == pytest.approx([0.0, 1.0], abs=1e-12)


def test_ellipse_perimeter_oracle():
    ell = CurveSpec(kind="ellipse", a=2.0, b=1.0)
    L, *_ = arclength_parametrize(ell, 256)
    oracle, _ = quad(lambda t: math.hypot(-2 * math.sin(t), math.cos(t)),
                     0.0, 2 * math.pi, epsabs=1e-13, limit=200)
    assert 2 * L == pytest.approx(oracle, abs=1e-8)


def test_circle_curvature():
    for R in (1.0, 2.5):
        c = CurveSpec(kind="circle", radius=R)
        L, s, pts, _, _ = arclength_parametrize(c, 512)
        kap = curvature_profile(pts, L)
        assert np.abs(kap - 1.0 / R).max() < 1e-9


def test_ellipse_curvature_closed_form():
    a, b = 2.0, 1.0
    ell = CurveSpec(kind="ellipse", a=a, b=b)
    L, s, pts, _, _ = arclength_parametrize(ell, 1024)
    kap = curvature_profile(pts, L)
    i = np.argmin(np.abs(pts[:, 0] - a) + np.abs(pts[:, 1]))
    # kappa = a b / (a^2 sin^2 + b^2 cos^2)^{3/2}; at (a, 0): a b / b^3
    assert kap[i] == pytest.approx(a * b / b ** 3, rel=1e-6)


def test_turning_number():
    ell = CurveSpec(kind="ellipse", a=2.0, b=1.0)
    L, s, pts, _, _ = arclength_parametrize(ell, 1024)
    kap = curvature_profile(pts, L)
    total = np.sum(kap) * (2 * L / kap.size)
    assert total == pytest.approx(2 * math.pi, abs=1e-8)


def test_normal_jet_radial_field(unit_circle):
    """B = 1 - |x|^2 composed with the tube map is 2t - t^2: gamma = 2, delta = -1."""
    field = FieldSpec(expression="1 - x1^2 - x2^2", k=1)
    L, s, pts, tangents, _ = arclength_parametrize(unit_circle, 128)
    normals = np.stack([-tangents[:, 1], tangents[:, 0]], axis=-1)
    gamma, delta = normal_jet(field, pts, normals, 1)
    assert np.abs(gamma - 2.0).max() < 1e-9
    assert np.abs(delta - (-1.0)).max() < 1e-8
    # delta~ = delta - gamma kappa = -3 on the unit circle
    kap = curvature_profile(pts, L)
    assert np.abs(delta - gamma * kap - (-3.0)).max() < 1e-8


def test_normal_jet_vanishing_order_mismatch(unit_circle):
    field = FieldSpec(expression="1 - x1^2 - x2^2", k=2)
    L, s, pts, tangents, _ = arclength_parametrize(unit_circle, 64)
    normals = np.stack([-tangents[:, 1], tangents[:, 0]], axis=-1)
    with pytest.raises(AssumptionError, match="vanish"):
        normal_jet(field, pts, normals, 2)


def test_normal_jet_k2(unit_circle):
    field = FieldSpec(expression="(1 - x1^2 - x2^2)^2 * (1 + 0.2*x2^2)", k=2)
    L, s, pts, tangents, _ = arclength_parametrize(unit_circle, 128)
    normals = np.stack([-tangents[:, 1], tangents[:, 0]], axis=-1)
    gamma, delta = normal_jet(field, pts, normals, 2)
    # (2t - t^2)^2 = 4t^2 - 4t^3 + ...: gamma = 4 g(s), delta = -4 g(s) + dg
    x2 = pts[:, 1]
    assert np.allclose(gamma, 4.0 * (1 + 0.2 * x2 ** 2), atol=1e-7)


def test_jet_consistency_slope(corpus_profile):
    """Remainder of the two-term jet is O(t^{k+2}): log-log slope >= k+2 - eps."""
    prof = corpus_profile
    i = 100
    pt, nv = prof.points[i], prof.normals[i]
    ts = np.geomspace(0.01, 0.08, 6)
    B = prof.field_spec
    rem = []
    for t in ts:
        x = pt + t * nv
        model = prof.gamma[i] * t + prof.delta[i] * t ** 2
        rem.append(abs(B(x[0], x[1]) - model))
    slope = np.polyfit(np.log(ts), np.log(rem), 1)[0]
    assert slope >= 3.0 - 0.1


def test_circulation_constant_field(unit_circle):
    f = FieldSpec(expression="3.0 + 0*x1", k=1)
    assert circulation(f, unit_circle) == pytest.approx(1.5, rel=1e-9)


def test_circulation_radial(unit_circle):
    f = FieldSpec(expression="1 - x1^2 - x2^2", k=1)
    assert circulation(f, unit_circle) == pytest.approx(0.25, rel=1e-9)


def test_circulation_linearity(unit_circle):
    f1 = FieldSpec(expression="1 - x1^2 - x2^2", k=1)
    f2 = FieldSpec(expression="2*(1 - x1^2 - x2^2)", k=1)
    assert circulation(f2, unit_circle) == pytest.approx(
        2 * circulation(f1, unit_circle), rel=1e-9)


def test_circulation_green_oracle(unit_circle, corpus_profile):
    """Cross-check the polar quadrature against the gauge line integral."""
    from magtunnel.validator import poincare_gauge

    B = corpus_profile.field_spec
    n = 4096
    theta = np.arange(n) * (2 * np.pi / n)
    pts = unit_circle.point(theta)
    vel = unit_circle.velocity(theta)
    A = poincare_gauge(B, pts)
    green = np.sum(A[:, 0] * vel[:, 0] + A[:, 1] * vel[:, 1]) * (2 * np.pi / n)
    assert corpus_profile.beta0 == pytest.approx(green / (2 * corpus_profile.L), rel=1e-9)


def test_wells_symmetric(corpus_profile):
    assert corpus_profile.s_l == pytest.approx(-corpus_profile.s_r, abs=1e-8)
    assert corpus_profile.s_r == pytest.approx(-math.pi / 2, abs=1e-8)
    assert corpus_profile.gamma0 == pytest.approx(2.0, abs=1e-8)
    assert corpus_profile.gamma_dd > 0


def test_wells_brute_force_scan(corpus_profile):
    s = np.linspace(-corpus_profile.L, corpus_profile.L, 20001)
    g = corpus_profile.gamma_at(s)
    i = np.argmin(g)
    assert min(abs(s[i] - corpus_profile.s_r), abs(s[i] - corpus_profile.s_l)) < 2e-4


def test_constant_gamma_rejected(unit_circle):
    f = FieldSpec(expression="1 - x1^2 - x2^2", k=1)
    with pytest.raises(AssumptionError, match="no isolated wells"):
        build_geometry(unit_circle, f, n_samples=256)


def test_asymmetric_field_rejected(unit_circle):
    f = FieldSpec(expression="(1 - x1^2 - x2^2)*(1 + 0.2*x1)", k=1)
    with pytest.raises(AssumptionError, match="symmetric"):
        build_geometry(unit_circle, f, n_samples=256)


def test_variability():
    ok, dev = variability_check(np.array([1.0, 1.0, 1.0]), 1.0, 0.0)
    assert ok and dev == 0.0
    gam = 1.0 * (1 + 0.1 * np.sin(np.linspace(0, np.pi, 1001)) ** 2)
    ok, dev = variability_check(gam, 1.0, 0.05)
    assert not ok
    assert dev == pytest.approx(0.1 / 1.1, abs=1e-6)


def test_profile_evenness(corpus_profile):
    n = corpus_profile.s_samples.size
    idx = (-np.arange(n)) % n
    for arr in (corpus_profile.kappa, corpus_profile.gamma, corpus_profile.delta):
        assert np.abs(arr[idx] - arr).max() < 1e-7 * max(1.0, np.abs(arr).max())


def test_tubular_injectivity(corpus_profile):
    assert 1.0 - 0.2 * np.abs(corpus_profile.kappa).max() > 0


def test_refinement_stability(unit_circle):
    f = FieldSpec(expression=SYMMETRIC_FIELD, k=1)
    a = build_geometry(unit_circle, f, n_samples=512)
    b = build_geometry(unit_circle, f, n_samples=1024)
    assert abs(a.gamma0 - b.gamma0) < 1e-7
    assert abs(a.s_r - b.s_r) < 1e-7
    assert abs(a.beta0 - b.beta0) < 1e-7


def test_profile_roundtrip(corpus_profile):
    d = corpus_profile.to_dict()
    back = GeometryProfile.from_dict(d)
    assert back.L == corpus_profile.L
    assert back.beta0 == corpus_profile.beta0
    assert np.array_equal(back.gamma, corpus_profile.gamma)
    assert back.to_dict() == d


def test_profile_csv(corpus_profile):
    text = corpus_profile.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "s,kappa,gamma,delta,delta_tilde"
    assert len(lines) == corpus_profile.s_samples.size + 1


def test_bad_curve_kind():
    with pytest.raises(ConfigError):
        CurveSpec(kind="triangle")


def test_clockwise_rejected():
    c = CurveSpec(kind="parametric", x_expr="cos(-theta)", y_expr="sin(-theta)")
    with pytest.raises(AssumptionError, match="counterclockwise"):
        arclength_parametrize(c, 64)
