"""Ground band of the generalized Montgomery family h_xi = D_t^2 + (xi - t^(k+1)/(k+1))^2.

The family is discretized by second-order central differences on [-T, T]
with Dirichlet truncation; scalar band data (minimum location/value/curvature)
are Richardson-extrapolated over a nested grid pair.  Complex frequencies xi
are handled by bilinear (unconjugated) Rayleigh-quotient iteration on the
complex-symmetric tridiagonal matrix, with branch continuity enforced by
homotopy in the imaginary part.

All quantities produced here (including the holomorphic extension used by the
eikonal solver) refer to one fixed extrapolated discretization, so downstream
residual checks are meaningful at the 1e-10 level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.optimize import minimize_scalar

__all__ = [
    "Grid1D",
    "BandTable",
    "ComplexEigenpair",
    "Tridiagonal",
    "assemble_montgomery",
    "lowest_real_eigs",
    "build_band_table",
    "band_holomorphic",
    "complex_eigenpair",
    "band_hessian",
    "BandModel",
]

_CODE_VERSION = "magtunnel-band-1"


class BandError(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [-T, T]; endpoints carry Dirichlet conditions."""

    half_width: float
    n: int

    def __post_init__(self):
        if not (self.half_width > 0 and np.isfinite(self.half_width)):
            raise ValueError("half_width must be positive and finite")
        if self.n < 16:
            raise ValueError("need at least 16 grid points")

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def tau(self):
        return np.linspace(-self.half_width, self.half_width, self.n)

    @property
    def interior(self):
        return self.tau[1:-1]

    def refined(self):
        """Nested grid with half the spacing (same endpoints)."""
        return Grid1D(self.half_width, 2 * self.n - 1)


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal operator (possibly complex symmetric)."""

    main: np.ndarray
    off: np.ndarray
    spacing: float

    @property
    def dim(self):
        return self.main.size

    def matvec(self, v):
        out = self.main * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out

    def toarray(self):
        a = np.diag(self.main)
        a += np.diag(self.off, 1) + np.diag(self.off, -1)
        return a

    def solve_shifted(self, shift, rhs):
        """Solve (A - shift I) x = rhs."""
        n = self.dim
        ab = np.zeros((3, n), dtype=np.result_type(self.main, shift, rhs))
        ab[0, 1:] = self.off
        ab[1] = self.main - shift
        ab[2, :-1] = self.off
        return solve_banded((1, 1), ab, rhs)


def montgomery_potential(k, xi, tau, gamma_scale=1.0):
    return (xi - gamma_scale * tau ** (k + 1) / (k + 1)) ** 2


def assemble_montgomery(k, xi, grid, gamma_scale=1.0):
    """Discretize D_t^2 + (xi - gamma_scale t^(k+1)/(k+1))^2 with Dirichlet ends.

    Rows/columns correspond to interior grid points.  The matrix is real
    symmetric for real (xi, gamma_scale) and complex symmetric otherwise.
    """
    if k < 1 or int(k) != k:
        raise ValueError("vanishing order k must be a positive integer")
    if not (np.isfinite(xi) and np.isfinite(gamma_scale)):
        raise ValueError("non-finite xi or gamma_scale")
    if gamma_scale == 0:
        raise ValueError("gamma_scale must be nonzero")
    tau = grid.interior
    dt2 = grid.spacing ** 2
    pot = montgomery_potential(k, xi, tau, gamma_scale)
    main = 2.0 / dt2 + pot
    off = np.full(tau.size - 1, -1.0 / dt2, dtype=main.dtype)
    return Tridiagonal(main, off, grid.spacing)


def potential_operator(potential_samples, grid):
    """Dirichlet discretization of D_t^2 + V for arbitrary sampled V (oracle hook)."""
    dt2 = grid.spacing ** 2
    v = np.asarray(potential_samples)
    if v.size == grid.n:
        v = v[1:-1]
    main = 2.0 / dt2 + v
    off = np.full(main.size - 1, -1.0 / dt2, dtype=main.dtype)
    return Tridiagonal(main, off, grid.spacing)


def lowest_real_eigs(op, m):
    """Lowest m eigenpairs of a real symmetric Tridiagonal.

    Eigenvectors are L2-normalized (with the grid weight) and signed so the
    value at the grid midpoint is positive.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > op.dim:
        raise ValueError(f"requested {m} eigenvalues of a {op.dim}-dim operator")
    if np.iscomplexobj(op.main):
        raise ValueError("lowest_real_eigs requires a real symmetric operator")
    vals, vecs = eigh_tridiagonal(
        op.main, op.off, select="i", select_range=(0, m - 1)
    )
    vecs = vecs / np.sqrt(op.spacing)
    mid = op.dim // 2
    for j in range(m):
        anchor = vecs[mid, j]
        if abs(anchor) < 1e-12 * np.abs(vecs[:, j]).max():
            anchor = vecs[np.argmax(np.abs(vecs[:, j])), j]
        if anchor < 0:
            vecs[:, j] = -vecs[:, j]
    return vals, vecs


def _bilinear(u, v, spacing):
    return spacing * np.dot(u, v)


def _ground_pair_complex(op, shift, v0=None, second=False, maxit=60, tol=1e-13):
    """Bilinear Rayleigh-quotient iteration for a complex-symmetric Tridiagonal.

    Returns (eigenvalue, vector) nearest the starting shift.  With
    second=True the iteration is deflated (bilinearly) against v0's
    converged companion, so v0 must then be the ground vector.
    """
    n = op.dim
    scale = np.abs(op.main).max()
    if v0 is None:
        x = np.exp(-np.linspace(-3, 3, n) ** 2)
        v = x.astype(complex)
    else:
        v = v0.astype(complex)
    deflate = None
    if second:
        deflate = v0
        v = np.roll(v0, max(1, n // 50)) + 1e-3
    lam = complex(shift)
    for it in range(maxit):
        if deflate is not None:
            v = v - (np.dot(deflate, v) / np.dot(deflate, deflate)) * deflate
        try:
            w = op.solve_shifted(lam, v)
        except np.linalg.LinAlgError:
            w = op.solve_shifted(lam * (1 + 1e-12) + 1e-14, v)
        if deflate is not None:
            w = w - (np.dot(deflate, w) / np.dot(deflate, deflate)) * deflate
        nrm = np.linalg.norm(w)
        if not np.isfinite(nrm) or nrm == 0:
            raise BandError("inverse iteration produced a non-finite vector")
        v = w / nrm
        denom = np.dot(v, v)
        if abs(denom) < 1e-8:
            raise BandError("quasi-null bilinear norm; eigenpair near exceptional point")
        lam_new = np.dot(v, op.matvec(v)) / denom
        res = np.linalg.norm(op.matvec(v) - lam_new * v)
        lam = lam_new
        if res <= tol * scale:
            return lam, v
    raise BandError(f"Rayleigh iteration failed to converge in {maxit} steps (residual {res:.2e})")


def _polish_ground_real(op, lam, vec):
    """One inverse-iteration + Rayleigh-quotient step on a real eigenpair."""
    for _ in range(2):
        try:
            w = op.solve_shifted(lam, vec)
        except np.linalg.LinAlgError:
            return lam
        w = w / np.linalg.norm(w)
        lam_new = float(np.dot(w, op.matvec(w)))
        vec = w
        if abs(lam_new - lam) < 1e-15 * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return lam


def _bilinear_normalize(v, spacing, reference=None):
    nrm2 = _bilinear(v, v, spacing)
    c = 1.0 / np.sqrt(nrm2)
    u = c * v
    if reference is not None:
        if np.real(_bilinear(u, reference, spacing)) < 0:
            u = -u
    else:
        mid = v.size // 2
        anchor = u[mid] if abs(u[mid]) > 1e-12 * np.abs(u).max() else u[np.argmax(np.abs(u))]
        if np.real(anchor) < 0:
            u = -u
    return u


@dataclass
class ComplexEigenpair:
    """Ground eigenpair of the (possibly complex-symmetric) fiber operator."""

    eigenvalue: complex
    samples: np.ndarray  # interior grid values, bilinearly normalized
    bilinear_norm: complex
    grid: Grid1D
    gap_to_second: float

    def moment(self, power):
        """Bilinear moment: integral of tau^power * u(tau)^2."""
        tau = self.grid.interior
        return self.grid.spacing * np.sum(tau ** power * self.samples ** 2)

    def derivative_moment(self):
        """Bilinear integral of u'(tau) u(tau)."""
        du = np.gradient(self.samples, self.grid.spacing)
        return self.grid.spacing * np.sum(du * self.samples)


def _complex_pair_on_grid(k, xi, gamma_scale, grid, nu_seed=None, v_seed=None,
                          separation_tol=1e-9, check_separation=True):
    """Ground pair at (possibly complex) xi on one grid, with homotopy in Im xi."""
    xi = complex(xi)
    gamma_scale = complex(gamma_scale)
    if nu_seed is None or v_seed is None:
        gs_start = gamma_scale.real if gamma_scale.imag == 0 else abs(gamma_scale)
        op_r = assemble_montgomery(k, xi.real, grid, gs_start)
        vals, vecs = lowest_real_eigs(op_r, 1)
        nu_seed, v_seed = vals[0], vecs[:, 0].astype(complex)
        n_steps = max(1, int(np.ceil(abs(xi.imag) / 0.05)),
                      int(np.ceil(abs(gamma_scale.imag) / 0.05)))
    else:
        n_steps = 1
    lam, v = complex(nu_seed), v_seed
    for j in range(1, n_steps + 1):
        t = j / n_steps
        xi_t = complex(xi.real, xi.imag * t) if n_steps > 1 else xi
        gs_t = complex(gamma_scale.real, gamma_scale.imag * t) if n_steps > 1 else gamma_scale
        op = assemble_montgomery(k, xi_t, grid, gs_t)
        prev_v = v
        lam, v = _ground_pair_complex(op, lam, v0=v)
        if abs(np.dot(prev_v, v)) < 0.5 * np.linalg.norm(prev_v) * np.linalg.norm(v):
            raise BandError("branch ambiguity: eigenvector overlap collapsed during homotopy")
    gap = np.inf
    if check_separation:
        op = assemble_montgomery(k, xi, grid, gamma_scale)
        lam2, _ = _ground_pair_complex(op, lam + 0.3, v0=v, second=True)
        gap = abs(lam2 - lam)
        if gap <= 10 * separation_tol * max(1.0, abs(lam)):
            raise BandError(
                f"branch ambiguity: ground eigenvalue separated from the second by only {gap:.2e}"
            )
    u = _bilinear_normalize(v, grid.spacing)
    return ComplexEigenpair(
        eigenvalue=lam,
        samples=u,
        bilinear_norm=_bilinear(u, u, grid.spacing),
        grid=grid,
        gap_to_second=gap,
    )


def complex_eigenpair(k, xi, gamma_scale, grid, nu_seed=None, v_seed=None):
    """Ground eigenpair of D_t^2 + (xi - gamma_scale t^(k+1)/(k+1))^2 at complex xi.

    Bilinear normalization: integral of u^2 equals 1 (no conjugation).  The
    branch is reached by stepwise homotopy in the imaginary parts starting
    from the self-adjoint real problem.
    """
    return _complex_pair_on_grid(k, xi, gamma_scale, grid, nu_seed=nu_seed, v_seed=v_seed)


def fh_derivative(pair, k, xi, gamma_scale=1.0):
    """Feynman-Hellmann bilinear integral: d(eigenvalue)/d(xi).

    Equals the integral of 2 (xi - gamma_scale tau^(k+1)/(k+1)) u^2 dtau for the
    bilinearly normalized eigenfunction u.
    """
    tau = pair.grid.interior
    w = 2.0 * (xi - gamma_scale * tau ** (k + 1) / (k + 1))
    return pair.grid.spacing * np.sum(w * pair.samples ** 2)


@dataclass
class BandTable:
    """Sampled ground band with minimum data and local Taylor model."""

    k: int
    grid: Grid1D
    xi_samples: np.ndarray
    nu1_values: np.ndarray
    nu2_values: np.ndarray
    xi0: float
    nu0: float
    nu0_dd: float
    taylor_coeffs: np.ndarray  # real derivatives/j! at xi0, c[j] = nu^(j)(xi0)/j!
    taylor_radius: float
    version: str = _CODE_VERSION
    _model: "BandModel | None" = field(default=None, repr=False, compare=False)

    @property
    def nu0_d3(self):
        return 6.0 * self.taylor_coeffs[3] if self.taylor_coeffs.size > 3 else 0.0

    def model(self):
        if self._model is None:
            object.__setattr__(self, "_model", BandModel(self.k, self.grid))
        return self._model

    def to_dict(self):
        return {
            "version": self.version,
            "k": self.k,
            "grid": {"half_width": self.grid.half_width.hex(), "n": self.grid.n},
            "xi_samples": [x.hex() for x in self.xi_samples.tolist()],
            "nu1_values": [x.hex() for x in self.nu1_values.tolist()],
            "nu2_values": [x.hex() for x in self.nu2_values.tolist()],
            "xi0": self.xi0.hex(),
            "nu0": self.nu0.hex(),
            "nu0_dd": self.nu0_dd.hex(),
            "taylor_coeffs": [x.hex() for x in self.taylor_coeffs.tolist()],
            "taylor_radius": self.taylor_radius.hex(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("version") != _CODE_VERSION:
            raise BandError(f"band table version mismatch: {d.get('version')!r}")
        fh = float.fromhex
        return cls(
            k=int(d["k"]),
            grid=Grid1D(fh(d["grid"]["half_width"]), int(d["grid"]["n"])),
            xi_samples=np.array([fh(x) for x in d["xi_samples"]]),
            nu1_values=np.array([fh(x) for x in d["nu1_values"]]),
            nu2_values=np.array([fh(x) for x in d["nu2_values"]]),
            xi0=fh(d["xi0"]),
            nu0=fh(d["nu0"]),
            nu0_dd=fh(d["nu0_dd"]),
            taylor_coeffs=np.array([fh(x) for x in d["taylor_coeffs"]]),
            taylor_radius=fh(d["taylor_radius"]),
        )

    def dumps(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def loads(cls, s):
        return cls.from_dict(json.loads(s))


class BandModel:
    """Richardson-extrapolated band evaluator on a fixed nested grid pair.

    nu(xi) is evaluated on grid and grid.refined() and combined as
    (4 nu_fine - nu_coarse)/3, killing the leading O(spacing^2) error of the
    second-order stencil.  Complex evaluations reuse eigenvector seeds per
    grid so that sweeps along a curve in the complex plane stay on branch.
    """

    def __init__(self, k, grid, gamma_scale=1.0):
        self.k = k
        self.grid = grid
        self.fine = grid.refined()
        self.gamma_scale = gamma_scale
        self._seeds = {}  # grid id -> (nu, vector) from the last complex solve

    def nu12_real(self, xi):
        """(nu1, nu2) at real xi, Richardson extrapolated.

        The ground eigenvalue is polished by one inverse-iteration Rayleigh
        step so that it is consistent with the complex-path evaluations far
        below the eps*norm floor of the direct tridiagonal solver.
        """
        out = []
        for g in (self.grid, self.fine):
            op = assemble_montgomery(self.k, xi, g, self.gamma_scale)
            vals, vecs = lowest_real_eigs(op, 2)
            lam1 = _polish_ground_real(op, vals[0], vecs[:, 0])
            out.append(np.array([lam1, vals[1]]))
        coarse, fine = out
        ext = (4.0 * fine - coarse) / 3.0
        return float(ext[0]), float(ext[1])

    def nu_real(self, xi):
        return self.nu12_real(xi)[0]

    def dnu_real(self, xi):
        """d(nu1)/d(xi) at real xi via the Feynman-Hellmann integral.

        Exact derivative of each discrete eigenvalue, so the band minimum can
        be located as a root with O(1) slope instead of as a noisy argmin.
        """
        out = []
        for g in (self.grid, self.fine):
            op = assemble_montgomery(self.k, xi, g, self.gamma_scale)
            _, vecs = lowest_real_eigs(op, 1)
            tau = g.interior
            w = 2.0 * (xi - self.gamma_scale * tau ** (self.k + 1) / (self.k + 1))
            out.append(g.spacing * np.sum(w * vecs[:, 0] ** 2))
        coarse, fine = out
        return (4.0 * fine - coarse) / 3.0

    def _pair(self, xi, g, seed_key, reuse=True):
        seed = self._seeds.get((seed_key, g.n)) if reuse else None
        if seed is not None:
            nu_seed, v_seed = seed
            pair = _complex_pair_on_grid(self.k, xi, self.gamma_scale, g,
                                         nu_seed=nu_seed, v_seed=v_seed,
                                         check_separation=False)
        else:
            pair = _complex_pair_on_grid(self.k, xi, self.gamma_scale, g)
        self._seeds[(seed_key, g.n)] = (pair.eigenvalue, pair.samples)
        return pair

    def reset_sweep(self, seed_key="sweep"):
        self._seeds.pop((seed_key, self.grid.n), None)
        self._seeds.pop((seed_key, self.fine.n), None)

    def nu_complex(self, z, seed_key="sweep", with_derivative=False, reuse=True):
        """Richardson-extrapolated ground eigenvalue at complex z.

        With with_derivative=True also returns d(nu)/dz from the bilinear
        Feynman-Hellmann integral (extrapolated the same way).
        """
        pc = self._pair(z, self.grid, seed_key, reuse)
        pf = self._pair(z, self.fine, seed_key, reuse)
        nu = (4.0 * pf.eigenvalue - pc.eigenvalue) / 3.0
        if not with_derivative:
            return nu
        dc = fh_derivative(pc, self.k, z, self.gamma_scale)
        df = fh_derivative(pf, self.k, z, self.gamma_scale)
        return nu, (4.0 * df - dc) / 3.0

    def pair_fine(self, z, seed_key="sweep", reuse=True):
        """Eigenpair on the fine grid (for moment integrals)."""
        return self._pair(z, self.fine, seed_key, reuse)


def _fh_root(model, xi_guess, span=2e-3):
    """Root of dnu/dxi near xi_guess by bracket expansion + Brent."""
    from scipy.optimize import brentq

    lo, hi = xi_guess - span, xi_guess + span
    for _ in range(20):
        flo, fhi = model.dnu_real(lo), model.dnu_real(hi)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if flo * fhi < 0:
            return brentq(model.dnu_real, lo, hi, xtol=1e-13, rtol=8.9e-16)
        span *= 2.0
        lo, hi = xi_guess - span, xi_guess + span
    raise BandError("could not bracket the zero of the band derivative")


def _derivative(f, x0, step):
    """4th-order central first difference plus one Richardson step."""

    def d1(h):
        return (-f(x0 + 2 * h) + 8 * f(x0 + h) - 8 * f(x0 - h) + f(x0 - 2 * h)) / (12 * h)

    a, b = d1(step), d1(step / 2)
    return (16.0 * b - a) / 15.0


def _taylor_from_samples(f, x0, order, half_span, n_pts=None):
    """Degree-`order` Taylor coefficients at x0 by least-squares polynomial fit."""
    if n_pts is None:
        n_pts = 2 * order + 5
    # Chebyshev-distributed nodes condition the Vandermonde fit well
    t = np.cos(np.pi * (np.arange(n_pts) + 0.5) / n_pts)
    xs = x0 + half_span * t
    ys = np.array([f(x) for x in xs])
    V = np.vander((xs - x0) / half_span, order + 1, increasing=True)
    coeffs_scaled, *_ = np.linalg.lstsq(V, ys, rcond=None)
    return coeffs_scaled / half_span ** np.arange(order + 1)


def build_band_table(k, xi_range, grid, taylor_order=8, n_samples=41):
    """Locate the band minimum and build the local holomorphic model.

    xi_range must bracket the minimum strictly in its interior; the minimum
    is refined by Brent iteration on the Richardson-extrapolated band to
    1e-10 in xi.
    """
    model = BandModel(k, grid)
    lo, hi = float(xi_range[0]), float(xi_range[1])
    if not lo < hi:
        raise ValueError("empty xi_range")
    xi_samples = np.linspace(lo, hi, n_samples)
    nu12 = np.array([model.nu12_real(x) for x in xi_samples])
    nu1, nu2 = nu12[:, 0], nu12[:, 1]
    imin = int(np.argmin(nu1))
    if imin in (0, n_samples - 1):
        raise BandError("bracket failure: band minimum on the boundary of xi_range")

    res = minimize_scalar(
        model.nu_real,
        bracket=(xi_samples[imin - 1], xi_samples[imin], xi_samples[imin + 1]),
        method="brent",
        options={"xtol": 1e-9},
    )
    # polish the argmin as a root of the FH derivative (noise-free slope)
    xi0 = _fh_root(model, float(res.x))
    nu0 = model.nu_real(xi0)
    if nu0 <= 0:
        raise BandError("band minimum is not positive")
    # curvature from the exact eigenvalue derivative: one numerical
    # differentiation instead of two
    nu0_dd = _derivative(model.dnu_real, xi0, 0.02)
    if nu0_dd <= 0:
        raise BandError("degenerate minimum: second derivative not positive")

    half_span = 0.22
    coeffs = _taylor_from_samples(model.nu_real, xi0, taylor_order, half_span)
    coeffs[0] = nu0
    coeffs[1] = 0.0
    coeffs[2] = nu0_dd / 2.0

    table = BandTable(
        k=k, grid=grid, xi_samples=xi_samples, nu1_values=nu1, nu2_values=nu2,
        xi0=xi0, nu0=nu0, nu0_dd=nu0_dd, taylor_coeffs=coeffs,
        taylor_radius=0.0, _model=model,
    )
    table.taylor_radius = _calibrate_trust_radius(table, model)
    return table


def _calibrate_trust_radius(table, model, target=5e-8, radii=(0.2, 0.15, 0.1, 0.07, 0.05)):
    """Largest tested radius where the Taylor model tracks the eigensolver.

    Checked on real offsets and on the imaginary axis, where the eikonal
    solver actually evaluates the extension.
    """
    for r in radii:
        errs = []
        for z in (table.xi0 + r, table.xi0 - r, table.xi0 + 1j * r,
                  table.xi0 + r * (0.6 + 0.8j)):
            model.reset_sweep("trust")
            nu_eig = model.nu_complex(z, seed_key="trust")
            nu_tay = _taylor_eval(table, z)
            errs.append(abs(nu_eig - nu_tay))
        if max(errs) < target:
            return float(r)
    return float(radii[-1]) / 2.0


def _taylor_eval(table, z):
    dz = z - table.xi0
    out = 0.0 + 0.0j
    for c in table.taylor_coeffs[::-1]:
        out = out * dz + c
    return out


def band_holomorphic(table, z):
    """Taylor-polynomial extension of the band at complex z near xi0.

    Raises outside the calibrated trust radius; callers may fall back to
    complex_eigenpair there.
    """
    if abs(z - table.xi0) > table.taylor_radius:
        raise BandError(
            f"extension domain exceeded: |z - xi0| = {abs(z - table.xi0):.3f} "
            f"> trust radius {table.taylor_radius:.3f}"
        )
    val = _taylor_eval(table, z)
    return complex(val)


def band_holomorphic_derivative(table, z):
    """d(nu)/dz of the Taylor model (same trust region)."""
    if abs(z - table.xi0) > table.taylor_radius:
        raise BandError("extension domain exceeded")
    dz = z - table.xi0
    c = table.taylor_coeffs
    out = 0.0 + 0.0j
    for j in range(c.size - 1, 0, -1):
        out = out * dz + j * c[j]
    return complex(out)


def band_hessian(table, gamma0, gamma_dd, sr=None):
    """Hessian of mu(x, xi) = gamma(x)^(2/(k+2)) nu(gamma(x)^(-1/(k+2)) xi) at the well.

    Diagonal by construction: [[(2/(k+2)) gamma'' gamma0^(-k/(k+2)) nu0, 0],
    [0, nu0'']].
    """
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    if gamma_dd <= 0:
        raise ValueError("well is degenerate: gamma'' must be positive")
    k = table.k
    h11 = (2.0 / (k + 2)) * gamma_dd * gamma0 ** (-k / (k + 2)) * table.nu0
    return np.array([[h11, 0.0], [0.0, table.nu0_dd]])


def default_grid(k):
    """Dirichlet box sized so the truncated tail mass is negligible (< 1e-14)."""
    half_width = {1: 8.0, 2: 7.0, 3: 6.5}.get(k, 6.0)
    return Grid1D(half_width, 3201)
