"""Transport-equation layer: effective band mu, zeta, curvature/jet coupling
term R(sigma), the subleading energy coefficient delta11, the velocity profile
V(sigma), and the amplitude/phase prefactors A_u, A_d, alpha0, K0.

Everything is evaluated on the eikonal sample grid of the right well; the
down-arc prefactor A_d reuses the right-well profile (the left-well route is
its exact mirror and is exercised separately in the test suite).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .band import (
    BandError,
    _complex_pair_on_grid,
    band_holomorphic,
    band_holomorphic_derivative,
    fh_derivative,
)
from .errors import SolverError

__all__ = [
    "MomentSet",
    "WkbConstants",
    "mu_eval",
    "zeta_const",
    "script_R",
    "delta11_value",
    "compute_wkb_constants",
]


@dataclass
class MomentSet:
    """Bilinear moments of the fiber eigenfunction entering R(sigma)."""

    m_high: complex      # integral tau^(2k+3) u^2
    m_mid: complex       # integral tau^(k+2) u^2
    m_one: complex       # integral tau u^2
    m_grad: complex      # integral u' u


def mu_eval(profile, table, sigma, xi):
    """mu(sigma, xi) = gamma(sigma)^(2/(k+2)) nu(gamma(sigma)^(-1/(k+2)) xi).

    Uses the Taylor extension when the scaled argument is inside the trust
    region, otherwise the extrapolated complex eigensolver.
    """
    k = table.k
    gam = profile.gamma_at(sigma)
    scaled = gam ** (-1.0 / (k + 2)) * xi
    try:
        nu = band_holomorphic(table, scaled)
    except BandError:
        model = table.model()
        model.reset_sweep("mu-eval")
        nu = model.nu_complex(scaled, seed_key="mu-eval")
    return gam ** (2.0 / (k + 2)) * nu


def zeta_const(profile, table):
    """Harmonic frequency of the effective well:
    zeta = sqrt((2/(k+2)) gamma''(s_r) nu0 / (gamma0^(k/(k+2)) nu0''))."""
    k = table.k
    return math.sqrt(
        (2.0 / (k + 2)) * profile.gamma_dd * table.nu0
        / (profile.gamma0 ** (k / (k + 2.0)) * table.nu0_dd)
    )


def script_R(gamma, delta, kappa, w, moments, k):
    """Curvature/jet coupling term of the first transport equation.

    Four bilinear integrals against u_{sigma, w}^2 (the last one carries u^2;
    the bilinear pairing of the conjugated-frequency eigenfunction forces the
    square).  All cutoffs are at their transparent values (c == 1, c' == 0).
    """
    t1 = 2.0 * gamma * (delta + kappa * gamma / (k + 1)) * moments.m_high / ((k + 1) * (k + 2))
    t2 = kappa * moments.m_grad
    t3 = -2.0 * w * (delta + (k + 3) * kappa * gamma / (k + 1)) * moments.m_mid / (k + 2)
    t4 = 2.0 * w ** 2 * kappa * moments.m_one
    return t1 + t2 + t3 + t4


def delta11_value(table, zeta, R_at_well, imag_tol=1e-6):
    """delta11 = nu0''/2 * zeta + R(s_well); the well value must be real."""
    if abs(R_at_well.imag) > imag_tol:
        warnings.warn(
            f"well value of R is not real: Im = {R_at_well.imag:.2e}",
            RuntimeWarning, stacklevel=2,
        )
    return 0.5 * table.nu0_dd * zeta + R_at_well.real


def _deriv4_uniform(y, h):
    """4th-order first derivative of uniformly sampled data with one-sided ends."""
    y = np.asarray(y)
    n = y.size
    d = np.empty_like(y)
    d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
    # 4th-order one-sided stencils
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
    d[0] = c @ y[:5]
    d[1] = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12 * h) @ y[:5]
    d[-1] = -(c @ y[-5:][::-1])
    d[-2] = -(np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12 * h) @ y[-5:][::-1])
    return d


def _integrate_uniform(y, h):
    """Composite Simpson on uniform data; 3/8 rule absorbs an odd interval."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 2:
        return 0.0
    if n == 2:
        return 0.5 * h * (y[0] + y[1])
    total = 0.0
    if (n - 1) % 2 == 1:
        if n >= 4:
            total += 3.0 * h / 8.0 * (y[0] + 3 * y[1] + 3 * y[2] + y[3])
            y = y[3:]
        else:
            total += 0.5 * h * (y[0] + y[1])
            y = y[1:]
    if y.size >= 3:
        total += h / 3.0 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-2:2].sum())
    return total


def _excised_integral(y, h):
    """Integral of y over [well, end] where y[0] sits at the removable
    singularity: integrate over [well + eps, end] for eps in {h, 2h, 3h} and
    extrapolate eps -> 0 quadratically.

    Returns (value, extrapolation_residual)."""
    vals = []
    for m in (1, 2, 3):
        vals.append(_integrate_uniform(y[m:], h))
    v1, v2, v3 = vals
    # quadratic model v(eps) = v0 + a eps + b eps^2 through eps = h, 2h, 3h
    v0 = 3 * v1 - 3 * v2 + v3
    resid = abs(v0 - (2 * v1 - v2))
    return v0, resid


@dataclass
class WkbConstants:
    """Scalar output of the transport layer plus the sampled profiles."""

    k: int
    zeta: float
    delta10: float
    delta11: float
    K0: float
    A_u: float
    A_d: float
    alpha0: float
    f10_sq_at_0: float
    V_inner: complex          # V at sigma = 0
    V_outer: complex          # V at sigma = -L
    R_at_well: complex
    alpha10_inner: float      # alpha_{1,0}(0), gauge alpha_{1,0}(s_r) = 0
    alpha10_outer: float      # alpha_{1,0}(-L)
    sigma: np.ndarray = field(repr=False)
    V_profile: np.ndarray = field(repr=False)
    R_profile: np.ndarray = field(repr=False)
    transport_integrand: np.ndarray = field(repr=False)
    excision_residuals: dict = field(repr=False, default_factory=dict)

    def to_dict(self):
        return {
            "k": self.k, "zeta": self.zeta, "delta10": self.delta10,
            "delta11": self.delta11, "K0": self.K0, "A_u": self.A_u,
            "A_d": self.A_d, "alpha0": self.alpha0,
            "f10_sq_at_0": self.f10_sq_at_0,
            "V_inner": [self.V_inner.real, self.V_inner.imag],
            "V_outer": [self.V_outer.real, self.V_outer.imag],
            "R_at_well": [self.R_at_well.real, self.R_at_well.imag],
        }

    def profiles_csv(self):
        header = "s,re_V,im_V,re_R,im_R"
        rows = [header]
        for i in range(self.sigma.size):
            rows.append(",".join(repr(float(v)) for v in (
                self.sigma[i], self.V_profile[i].real, self.V_profile[i].imag,
                self.R_profile[i].real, self.R_profile[i].imag)))
        return "\n".join(rows) + "\n"


def _fiber_sweep(profile, table, sol):
    """March the fiber eigenproblem along the eikonal samples.

    Returns (V_profile, R_profile): V = -i d(mu)/d(xi) at (sigma, w(sigma))
    via the bilinear Feynman-Hellmann integral; R from the moment set.  Both
    Richardson-extrapolated over the band's nested grid pair.
    """
    k = table.k
    model = table.model()
    sigma = sol.sigma
    gamma = sol.gamma_vals
    kappa = profile.kappa_at(sigma)
    delta = profile.delta_at(sigma)
    n = sigma.size
    V = np.empty(n, dtype=complex)
    R = np.empty(n, dtype=complex)
    for gi, g in enumerate((table.grid, table.grid.refined())):
        fh_vals = np.empty(n, dtype=complex)
        R_vals = np.empty(n, dtype=complex)
        seed = None
        # march from the well outward in both directions to keep RQI seeds local
        order = list(range(sol.well_index, n)) + list(range(sol.well_index - 1, -1, -1))
        pair_at_well = None
        for j, i in enumerate(order):
            w = sol.w[i]
            if j == 0 or i == sol.well_index - 1:
                seed = pair_at_well
            try:
                pair = _complex_pair_on_grid(
                    k, w, gamma[i], g,
                    nu_seed=None if seed is None else seed[0],
                    v_seed=None if seed is None else seed[1],
                    check_separation=False,
                )
            except BandError as exc:
                raise SolverError(f"fiber sweep failed at sigma = {sigma[i]:.6f}: {exc}") from exc
            if i == sol.well_index:
                pair_at_well = (pair.eigenvalue, pair.samples)
            seed = (pair.eigenvalue, pair.samples)
            fh_vals[i] = fh_derivative(pair, k, w, gamma[i])
            moments = MomentSet(
                m_high=pair.moment(2 * k + 3),
                m_mid=pair.moment(k + 2),
                m_one=pair.moment(1),
                m_grad=pair.derivative_moment(),
            )
            R_vals[i] = script_R(gamma[i], delta[i], kappa[i], w, moments, k)
        if gi == 0:
            V_coarse, R_coarse = -1j * fh_vals, R_vals
        else:
            V = (4.0 * (-1j * fh_vals) - V_coarse) / 3.0
            R = (4.0 * R_vals - R_coarse) / 3.0
    return V, R


def compute_wkb_constants(profile, table, right_sol):
    """All transport-layer constants from the right-well eikonal solution.

    A_u integrates the transport integrand from the well to sigma = 0, A_d
    from the well to sigma = -L (equal to the left-well definition by the
    x1 -> -x1 symmetry of the configuration); the removable singularity at the
    well is handled by excising eps = (1..3) grid cells and extrapolating.
    """
    if right_sol.side != "right":
        raise ValueError("transport constants are driven by the right-well solution")
    k = table.k
    zeta = zeta_const(profile, table)
    delta10 = profile.gamma0 ** (2.0 / (k + 2)) * table.nu0
    V, R = _fiber_sweep(profile, table, right_sol)

    iw = right_sol.well_index
    sigma = right_sol.sigma
    h_up = sigma[iw + 1] - sigma[iw]
    h_down = sigma[iw] - sigma[iw - 1]
    Vp = np.empty_like(V)
    Vp[:iw + 1] = _deriv4_uniform(V[:iw + 1], h_down)
    Vp[iw:] = _deriv4_uniform(V[iw:], h_up)
    # the well belongs to both uniform segments; average the two stencils
    Vp[iw] = 0.5 * (_deriv4_uniform(V[:iw + 1], h_down)[-1] + _deriv4_uniform(V[iw:], h_up)[0])

    R_at_well = complex(R[iw])
    d11 = delta11_value(table, zeta, R_at_well)

    integrand = (Vp + 2.0 * R - 2.0 * d11) / (2.0 * V)
    integrand[iw] = _well_limit(Vp, R, V, iw, h_up, h_down, d11)

    up = integrand[iw:]
    down = integrand[iw::-1]  # from the well towards -L, uniform spacing h_down
    int_up_re, res_u = _excised_integral(np.real(up), h_up)
    int_down_re, res_d = _excised_integral(np.real(down), h_down)
    int_up_im, res_ui = _excised_integral(np.imag(up), h_up)
    int_down_im, res_di = _excised_integral(np.imag(down), h_down)
    if max(res_u, res_d) > 5e-4 * (1.0 + abs(int_up_re) + abs(int_down_re)):
        raise SolverError(
            f"transport integral extrapolation did not settle near the well "
            f"(residuals {res_u:.2e}, {res_d:.2e})"
        )

    # the array-ordered down integrals run over [-L, s_r]; the oriented
    # integrals from the well to -L flip their sign
    A_u = math.exp(-int_up_re)
    A_d = math.exp(int_down_re)
    alpha10_inner = -int_up_im      # alpha_{1,0}(0)
    alpha10_outer = int_down_im     # alpha_{1,0}(-L)
    L = -sigma[0]
    alpha0 = (alpha10_inner - alpha10_outer) / L
    K0 = (zeta / math.pi) ** 0.25

    return WkbConstants(
        k=k, zeta=zeta, delta10=delta10, delta11=d11, K0=K0,
        A_u=A_u, A_d=A_d, alpha0=alpha0,
        f10_sq_at_0=math.sqrt(zeta / math.pi) * A_u,
        V_inner=complex(V[-1]), V_outer=complex(V[0]),
        R_at_well=R_at_well,
        alpha10_inner=alpha10_inner, alpha10_outer=alpha10_outer,
        sigma=sigma, V_profile=V, R_profile=R,
        transport_integrand=integrand,
        excision_residuals={
            "up_re": res_u, "down_re": res_d, "up_im": res_ui, "down_im": res_di,
        },
    )


def _well_limit(Vp, R, V, iw, h_up, h_down, d11):
    """Removable-singularity value of the transport integrand at the well.

    Numerator and V both vanish linearly; the ratio limit is taken from
    centered difference quotients one cell away.
    """
    num_p = Vp[iw + 1] + 2.0 * R[iw + 1] - 2.0 * d11
    num_m = Vp[iw - 1] + 2.0 * R[iw - 1] - 2.0 * d11
    lim_p = num_p / (2.0 * V[iw + 1])
    lim_m = num_m / (2.0 * V[iw - 1])
    return 0.5 * (lim_p + lim_m)


def v_profile_chain_rule(table, sol):
    """Cross-check route for V: -i gamma^(1/(k+2)) nu'(xi0 + i phi) through the
    Taylor derivative (trust region) or the unit-scale eigensolver."""
    k = table.k
    model = table.model()
    out = np.empty(sol.sigma.size, dtype=complex)
    model.reset_sweep("v-chain")
    for i in range(sol.sigma.size):
        z = table.xi0 + 1j * sol.phi[i]
        try:
            d = band_holomorphic_derivative(table, z)
        except BandError:
            _, d = model.nu_complex(z, seed_key="v-chain", with_derivative=True)
        out[i] = -1j * sol.gamma_vals[i] ** (1.0 / (k + 2)) * d
    return out
