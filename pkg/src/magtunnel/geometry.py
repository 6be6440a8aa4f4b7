"""Arc-length data of the zero curve and normal jets of the magnetic field.

Ingests a closed curve (circle, ellipse, or parametric expressions) and a
scalar field B(x1, x2) vanishing on it, and produces the profiles that drive
the rest of the pipeline: curvature kappa(s), the normal-jet coefficients
gamma(s) and delta(s) of B (orders k and k+1), the mean flux beta0 through
the interior, and the two symmetric wells of gamma.

Conventions: counterclockwise arc-length parametrization, s = 0 at the
intersection of the curve with {x1 = 0} of larger x2, inward unit normal
(det(M', nu) = 1), signed normal distance t along nu.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import AssumptionError, ConfigError, SolverError
from .expressions import Expression, parse_curve_component, parse_field

__all__ = [
    "CurveSpec",
    "FieldSpec",
    "GeometryProfile",
    "arclength_parametrize",
    "build_geometry",
    "circulation",
    "locate_wells",
    "variability_check",
]

_TWO_PI = 2.0 * math.pi


@dataclass
class CurveSpec:
    """Closed plane curve, counterclockwise.

    kind: 'circle' (radius), 'ellipse' (a, b), or 'parametric' with component
    expressions in theta on [0, 2*pi).
    """

    kind: str
    radius: float = 1.0
    a: float = 1.0
    b: float = 1.0
    x_expr: str = ""
    y_expr: str = ""

    def __post_init__(self):
        if self.kind == "circle":
            self.x_expr, self.y_expr = f"{self.radius!r}*cos(theta)", f"{self.radius!r}*sin(theta)"
        elif self.kind == "ellipse":
            self.x_expr, self.y_expr = f"{self.a!r}*cos(theta)", f"{self.b!r}*sin(theta)"
        elif self.kind != "parametric":
            raise ConfigError(f"unknown curve kind {self.kind!r}")
        if not self.x_expr or not self.y_expr:
            raise ConfigError("parametric curve needs x_expr and y_expr")
        self._x = parse_curve_component(self.x_expr)
        self._y = parse_curve_component(self.y_expr)
        self._dx = self._x.diff("theta")
        self._dy = self._y.diff("theta")
        self._ddx = self._dx.diff("theta")
        self._ddy = self._dy.diff("theta")

    def point(self, theta):
        return np.stack([self._x(theta), self._y(theta)], axis=-1)

    def velocity(self, theta):
        return np.stack([self._dx(theta), self._dy(theta)], axis=-1)

    def acceleration(self, theta):
        return np.stack([self._ddx(theta), self._ddy(theta)], axis=-1)

    def speed(self, theta):
        v = self.velocity(theta)
        return np.hypot(v[..., 0], v[..., 1])


@dataclass
class FieldSpec:
    """Scalar magnetic field B(x1, x2) with declared vanishing order k on the curve."""

    expression: str
    k: int

    def __post_init__(self):
        if self.k < 1 or int(self.k) != self.k:
            raise ConfigError("vanishing order k must be a positive integer")
        self._B = parse_field(self.expression)

    def __call__(self, x1, x2):
        return self._B(x1, x2)

    @property
    def parsed(self):
        return self._B


class ArcLengthMap:
    """Invertible map between the curve parameter theta and arc length s.

    The cumulative arc length of a smooth periodic speed is integrated
    exactly through its Fourier series; s -> theta is then solved by Newton
    iteration (machine precision, a few steps).
    """

    def __init__(self, curve, n_fft=8192):
        self.curve = curve
        theta = np.arange(n_fft) * (_TWO_PI / n_fft)
        speed = curve.speed(theta)
        if np.min(speed) < 1e-10 * np.max(speed):
            raise AssumptionError("curve parametrization is singular (zero speed)")
        c = np.fft.rfft(speed) / n_fft
        self.mean_speed = float(c[0].real)
        self.total_length = self.mean_speed * _TWO_PI
        # antiderivative of the oscillatory part
        n = np.arange(1, c.size)
        self._osc_coeff = c[1:] / (1j * n)
        self._n = n
        # orientation: counterclockwise means positive enclosed area
        x, y = curve.point(theta).T
        vx, vy = curve.velocity(theta).T
        area2 = np.mean(x * vy - y * vx) * _TWO_PI
        if area2 <= 0:
            raise AssumptionError("curve must be parametrized counterclockwise")
        self.theta0 = self._find_top_crossing()
        self._s_at_theta0 = self._cumlen(self.theta0)

    def _cumlen(self, theta):
        """Arc length from theta=0 to theta (analytic in the Fourier series)."""
        theta = np.asarray(theta, dtype=float)
        phases = np.exp(1j * np.outer(theta, self._n))
        osc = 2.0 * np.real(phases @ self._osc_coeff - self._osc_coeff.sum())
        out = self.mean_speed * theta + osc
        return out if out.ndim else float(out)

    def _find_top_crossing(self):
        """Parameter of the intersection with {x1 = 0} having the larger x2."""
        theta = np.linspace(0.0, _TWO_PI, 721)
        x = self.curve.point(theta)[:, 0]
        roots = []
        for i in range(len(theta) - 1):
            if x[i] == 0.0:
                roots.append(theta[i])
            elif x[i] * x[i + 1] < 0:
                roots.append(brentq(lambda t: self.curve.point(t)[0], theta[i], theta[i + 1],
                                    xtol=1e-15))
        if not roots:
            raise AssumptionError("curve never crosses the symmetry axis {x1 = 0}")
        ys = [self.curve.point(t)[1] for t in roots]
        return float(roots[int(np.argmax(ys))])

    def s_of_theta(self, theta):
        return self._cumlen(theta) - self._s_at_theta0

    def theta_of_s(self, s):
        """Newton inversion; s may be any real (periodic continuation)."""
        s = np.asarray(s, dtype=float)
        th = self.theta0 + s / self.mean_speed
        for _ in range(60):
            f = self.s_of_theta(th) - s
            th = th - f / self.curve.speed(th)
            if np.max(np.abs(f)) < 1e-13 * max(1.0, self.total_length):
                break
        else:
            raise SolverError("arc-length inversion did not converge")
        return th if th.ndim else float(th)


def arclength_parametrize(curve, n_samples=1024, tol=1e-10):
    """Arc-length samples of the curve: (L, points, tangents, arcmap).

    Half-length L = |curve|/2; samples live on the uniform grid
    s_i = -L + i 2L/n.  |M'(s)| = 1 is verified to tol at all samples.
    """
    amap = ArcLengthMap(curve)
    L = amap.total_length / 2.0
    s = -L + np.arange(n_samples) * (2.0 * L / n_samples)
    theta = amap.theta_of_s(s)
    pts = curve.point(theta)
    vel = curve.velocity(theta)
    tangents = vel / curve.speed(theta)[:, None]
    speed_err = np.abs(np.hypot(*tangents.T) - 1.0).max()
    if speed_err > tol:
        raise SolverError(f"unit-speed check failed: {speed_err:.2e}")
    return L, s, pts, tangents, amap


def _fft_derivative(samples, period):
    """Spectral derivative of uniformly sampled periodic data."""
    n = samples.shape[0]
    kvec = np.fft.fftfreq(n, d=1.0 / n) * (_TWO_PI / period)
    if samples.ndim > 1:
        kvec = kvec.reshape((n,) + (1,) * (samples.ndim - 1))
    return np.fft.ifft(1j * kvec * np.fft.fft(samples, axis=0), axis=0).real


def curvature_profile(points, L):
    """Signed curvature from spectral differentiation of the sampled curve.

    With the counterclockwise convention and inward normal nu = rot90(M'),
    M'' = kappa nu, so kappa = det(M', M'').
    """
    d1 = _fft_derivative(points, 2.0 * L)
    d2 = _fft_derivative(d1, 2.0 * L)
    return d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]


_JET_STENCIL_HALF = 5  # 10th-order central first-derivative block


def _normal_jet_at(field, pts, normals, orders, step):
    """Derivatives d^j/dt^j B(M + t nu)|_0 for j in `orders` (vectorized in s).

    Central finite differences on 2*_JET_STENCIL_HALF+1 nodes; accuracy
    O(step^(2*half - j)).
    """
    half = _JET_STENCIL_HALF
    tnodes = step * np.arange(-half, half + 1)
    g = np.empty((tnodes.size, pts.shape[0]))
    for i, t in enumerate(tnodes):
        x = pts + t * normals
        g[i] = field(x[:, 0], x[:, 1])
    # derivative weights from the local polynomial model (exact Vandermonde solve)
    V = np.vander(tnodes, tnodes.size, increasing=True)
    out = {}
    for j in orders:
        rhs = np.zeros(tnodes.size)
        rhs[j] = math.factorial(j)
        w = np.linalg.solve(V.T, rhs)
        out[j] = w @ g
    return out


def normal_jet(field, pts, normals, k, step=0.04, validate=True, vanish_rtol=2e-6):
    """(gamma, delta) profiles: normal derivatives of order k and k+1 over k!, (k+1)!.

    Richardson extrapolation over steps (step, step/2); optionally validates
    that all lower-order normal derivatives vanish (declared vanishing order).
    """
    orders = list(range(k + 2)) if validate else [k, k + 1]
    jet_a = _normal_jet_at(field, pts, normals, orders, step)
    jet_b = _normal_jet_at(field, pts, normals, orders, step / 2.0)
    p = 2 * _JET_STENCIL_HALF  # formal FD order of the lowest derivatives
    jet = {j: (2.0 ** (p - j) * jet_b[j] - jet_a[j]) / (2.0 ** (p - j) - 1.0) for j in orders}
    gamma = jet[k] / math.factorial(k)
    delta = jet[k + 1] / math.factorial(k + 1)
    if validate:
        scale = np.abs(jet[k]).max()
        for j in range(k):
            if np.abs(jet[j]).max() > vanish_rtol * max(scale, 1e-30):
                raise AssumptionError(
                    f"field does not vanish to declared order {k}: normal derivative "
                    f"of order {j} has magnitude {np.abs(jet[j]).max():.3e}"
                )
    return gamma, delta


def circulation(field, curve, rel_tol=1e-9):
    """Mean of B over the interior: (1/|curve|) * integral of B.

    Radial-polar quadrature around the interior centroid (the curve must be
    star-shaped with respect to it): Gauss-Legendre radially, periodic
    trapezoid angularly, with doubling until the relative change is below
    rel_tol.
    """
    amap = ArcLengthMap(curve)
    n0 = 256
    theta = np.arange(n0) * (_TWO_PI / n0)
    pts = curve.point(theta)
    centroid = pts.mean(axis=0)

    from numpy.polynomial.legendre import leggauss

    def polar_integral(n_theta, n_r):
        th = np.arange(n_theta) * (_TWO_PI / n_theta)
        P = curve.point(th) - centroid
        dP = curve.velocity(th)
        cross = P[:, 0] * dP[:, 1] - P[:, 1] * dP[:, 0]
        if np.min(cross) <= 0:
            raise AssumptionError("curve is not star-shaped around its centroid")
        xr, wr = leggauss(n_r)
        r = 0.5 * (xr + 1.0)
        wr = 0.5 * wr
        total = 0.0
        for ri, wi in zip(r, wr):
            x = centroid[None, :] + ri * P
            total += wi * ri * np.sum(field(x[:, 0], x[:, 1]) * cross)
        return total * (_TWO_PI / n_theta)

    prev = polar_integral(256, 24)
    for n_theta, n_r in ((512, 32), (1024, 48), (2048, 64), (4096, 96)):
        cur = polar_integral(n_theta, n_r)
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300):
            return cur / amap.total_length
        prev = cur
    raise SolverError("flux quadrature did not converge to the requested tolerance")


def locate_wells(s_dense, gamma_dense, gamma_at, L, sym_tol=1e-8):
    """Two symmetric non-degenerate minima of gamma: (s_r, s_l, gamma0, gamma_dd).

    Scans the dense profile for local minima and polishes each with Brent on
    the finite-difference derivative of the exact jet evaluation gamma_at.
    """
    n = s_dense.size
    prev = np.roll(gamma_dense, 1)
    nxt = np.roll(gamma_dense, -1)
    is_min = (gamma_dense < prev) & (gamma_dense <= nxt)
    idx = np.flatnonzero(is_min)
    spread = gamma_dense.max() - gamma_dense.min()
    if spread < 1e-10 * max(abs(gamma_dense.max()), 1e-30):
        raise AssumptionError("no isolated wells: gamma is constant on the curve")
    if idx.size != 2:
        raise AssumptionError(
            f"expected exactly two wells of gamma, found {idx.size} local minima"
        )

    h = (s_dense[1] - s_dense[0]) * 0.5

    def dgamma(s):
        return (gamma_at(s - 2 * h) - 8 * gamma_at(s - h)
                + 8 * gamma_at(s + h) - gamma_at(s + 2 * h)) / (12 * h)

    wells = []
    for i in idx:
        a, b = s_dense[i] - 1.5 * (s_dense[1] - s_dense[0]), s_dense[i] + 1.5 * (s_dense[1] - s_dense[0])
        if dgamma(a) * dgamma(b) > 0:
            a, b = a - 2 * h, b + 2 * h
        wells.append(brentq(dgamma, a, b, xtol=1e-13))
    wells = sorted(wells)
    s_r = wells[0] if wells[0] < 0 else wells[1] - 2 * L
    s_l = -s_r
    if abs(wells[0] + wells[1]) > sym_tol * max(L, 1.0):
        raise AssumptionError(
            f"wells are not symmetric: s={wells[0]:.8f} and s={wells[1]:.8f}"
        )
    g_r, g_l = gamma_at(wells[0]), gamma_at(wells[1])
    if abs(g_r - g_l) > 1e-8 * max(abs(g_r), 1e-30):
        raise AssumptionError("the two wells have different depths")
    gamma0 = 0.5 * (g_r + g_l)
    if gamma0 <= 0:
        raise AssumptionError("gamma must stay positive on the curve")
    # curvature of gamma at the well, step wide enough to sit above jet noise
    hh = 2e-2 * max(L, 1.0) / math.pi
    def d2(hstep):
        return (-gamma_at(s_r + 2 * hstep) + 16 * gamma_at(s_r + hstep) - 30 * gamma_at(s_r)
                + 16 * gamma_at(s_r - hstep) - gamma_at(s_r - 2 * hstep)) / (12 * hstep ** 2)
    gamma_dd = (16 * d2(hh / 2) - d2(hh)) / 15.0
    if gamma_dd <= 1e-8 * max(gamma0, 1.0):
        raise AssumptionError("degenerate well: gamma'' is not positive at the minimum")
    return float(s_r), float(s_l), float(gamma0), float(gamma_dd)


def variability_check(gamma, gamma0, epsilon):
    """sup |1 - gamma0/gamma| compared to epsilon; (passed, deviation)."""
    deviation = float(np.max(np.abs(1.0 - gamma0 / gamma)))
    return deviation <= epsilon, deviation


@dataclass
class GeometryProfile:
    """Arc-length profiles of the zero curve and the field's normal jet."""

    L: float
    k: int
    s_samples: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    kappa: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    delta_tilde: np.ndarray
    beta0: float
    s_r: float
    s_l: float
    gamma0: float
    gamma_dd: float
    variability: float
    curve: CurveSpec = field(repr=False, default=None)
    field_spec: FieldSpec = field(repr=False, default=None)
    arcmap: ArcLengthMap = field(repr=False, default=None, compare=False)

    # -- interpolation helpers -------------------------------------------------
    def _trig_interp(self, samples, s):
        coeffs = np.fft.rfft(samples) / samples.size
        if samples.size % 2 == 0:
            coeffs[-1] *= 0.5  # split the Nyquist mode symmetrically
        omega = math.pi / self.L
        scalar = np.isscalar(s)
        s = np.atleast_1d(np.asarray(s, dtype=float))
        m = np.arange(1, coeffs.size)
        phases = np.exp(1j * omega * np.outer(s + self.L, m))
        acc = coeffs[0].real + 2.0 * np.real(phases @ coeffs[1:])
        return float(acc[0]) if scalar else acc

    def gamma_at(self, s):
        """gamma at arbitrary s by direct jet evaluation (not interpolation)."""
        g, _ = self._jet_at(s)
        return g

    def delta_at(self, s):
        _, d = self._jet_at(s)
        return d

    def _jet_at(self, s):
        scalar = np.isscalar(s)
        s = np.atleast_1d(np.asarray(s, dtype=float))
        theta = self.arcmap.theta_of_s(s)
        theta = np.atleast_1d(theta)
        pts = self.curve.point(theta)
        vel = self.curve.velocity(theta)
        tang = vel / self.curve.speed(theta)[:, None]
        normals = np.stack([-tang[:, 1], tang[:, 0]], axis=-1)
        g, d = normal_jet(self.field_spec, pts, normals, self.k, validate=False)
        if scalar:
            return float(g[0]), float(d[0])
        return g, d

    def kappa_at(self, s):
        return self._trig_interp(self.kappa, s)

    # -- serialization ----------------------------------------------------------
    def to_dict(self):
        def arr(a):
            return [float(x).hex() for x in np.asarray(a).ravel().tolist()]

        return {
            "version": "magtunnel-geometry-1",
            "L": self.L.hex(),
            "k": self.k,
            "n": int(self.s_samples.size),
            "s_samples": arr(self.s_samples),
            "points": arr(self.points),
            "tangents": arr(self.tangents),
            "normals": arr(self.normals),
            "kappa": arr(self.kappa),
            "gamma": arr(self.gamma),
            "delta": arr(self.delta),
            "delta_tilde": arr(self.delta_tilde),
            "beta0": self.beta0.hex(),
            "s_r": self.s_r.hex(),
            "s_l": self.s_l.hex(),
            "gamma0": self.gamma0.hex(),
            "gamma_dd": self.gamma_dd.hex(),
            "variability": self.variability.hex(),
        }

    @classmethod
    def from_dict(cls, d, curve=None, field_spec=None, arcmap=None):
        fh = float.fromhex
        n = int(d["n"])

        def arr(key, cols=None):
            flat = np.array([fh(x) for x in d[key]])
            return flat.reshape(n, cols) if cols else flat

        return cls(
            L=fh(d["L"]), k=int(d["k"]), s_samples=arr("s_samples"),
            points=arr("points", 2), tangents=arr("tangents", 2), normals=arr("normals", 2),
            kappa=arr("kappa"), gamma=arr("gamma"), delta=arr("delta"),
            delta_tilde=arr("delta_tilde"), beta0=fh(d["beta0"]), s_r=fh(d["s_r"]),
            s_l=fh(d["s_l"]), gamma0=fh(d["gamma0"]), gamma_dd=fh(d["gamma_dd"]),
            variability=fh(d["variability"]), curve=curve, field_spec=field_spec,
            arcmap=arcmap,
        )

    def dumps(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def to_csv(self):
        header = "s,kappa,gamma,delta,delta_tilde"
        rows = [header]
        for i in range(self.s_samples.size):
            rows.append(",".join(repr(v) for v in (
                self.s_samples[i], self.kappa[i], self.gamma[i],
                self.delta[i], self.delta_tilde[i])))
        return "\n".join(rows) + "\n"


def build_geometry(curve, field_spec, n_samples=1024, sym_tol=1e-8, t_jet=0.2):
    """Assemble the full GeometryProfile; validates the structural hypotheses.

    Checks performed: x2-axis symmetry of curve and field, unit-speed
    parametrization, tubular injectivity at |t| <= t_jet, declared vanishing
    order, exactly two symmetric non-degenerate wells of gamma.
    """
    L, s, pts, tangents, amap = arclength_parametrize(curve, n_samples)
    normals = np.stack([-tangents[:, 1], tangents[:, 0]], axis=-1)

    # x1 -> -x1 symmetry of the curve: M(-s) = (-M1(s), M2(s))
    idx_rev = (-np.arange(n_samples)) % n_samples
    mirror = np.stack([-pts[idx_rev, 0], pts[idx_rev, 1]], axis=-1)
    curve_sym = np.abs(mirror - pts).max()
    if curve_sym > sym_tol * max(1.0, np.abs(pts).max()):
        raise AssumptionError(f"curve is not symmetric about the x2-axis ({curve_sym:.2e})")
    # field symmetry at off-curve probe points
    probe = pts + 0.07 * normals
    fsym = np.abs(field_spec(-probe[:, 0], probe[:, 1]) - field_spec(probe[:, 0], probe[:, 1])).max()
    fscale = np.abs(field_spec(probe[:, 0], probe[:, 1])).max()
    if fsym > sym_tol * max(fscale, 1e-30):
        raise AssumptionError(f"field is not symmetric about the x2-axis ({fsym:.2e})")

    kappa = curvature_profile(pts, L)
    if (1.0 - t_jet * np.abs(kappa).max()) <= 0:
        raise AssumptionError("tubular neighborhood of width t_jet is not injective")

    gamma, delta = normal_jet(field_spec, pts, normals, field_spec.k)
    if np.min(gamma) <= 0:
        raise AssumptionError("gamma must be positive on the whole curve")
    delta_tilde = delta - gamma * kappa
    beta0 = circulation(field_spec, curve)

    profile = GeometryProfile(
        L=L, k=field_spec.k, s_samples=s, points=pts, tangents=tangents,
        normals=normals, kappa=kappa, gamma=gamma, delta=delta,
        delta_tilde=delta_tilde, beta0=beta0, s_r=0.0, s_l=0.0, gamma0=0.0,
        gamma_dd=0.0, variability=0.0, curve=curve, field_spec=field_spec,
        arcmap=amap,
    )
    s_r, s_l, gamma0, gamma_dd = locate_wells(s, gamma, profile.gamma_at, L, sym_tol)
    profile.s_r, profile.s_l = s_r, s_l
    profile.gamma0, profile.gamma_dd = gamma0, gamma_dd
    _, profile.variability = variability_check(gamma, gamma0, np.inf)

    # gamma evenness under the declared symmetry
    gsym = np.abs(gamma[idx_rev] - gamma).max()
    if gsym > 1e-7 * max(gamma0, 1e-30):
        raise AssumptionError(f"gamma(s) is not even in s ({gsym:.2e})")
    return profile
