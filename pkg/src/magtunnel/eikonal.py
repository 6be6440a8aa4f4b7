"""Complex eikonal equation along the zero curve and Agmon distances.

For each well the equation nu(xi0 + i phi(sigma)) = nu0 (gamma0/gamma)^(2/(k+2))
is solved by complex Newton iteration on the band evaluator, marching outward
from the well so the branch stays continuous.  The real part of phi integrates
to the Agmon weight Phi, the imaginary part enters the oscillatory phase
primitive g, and the combination w = gamma^(1/(k+2)) (xi0 + i phi) is the
complexified frequency the transport layer evaluates the fiber family at.

The Newton residual is measured against the same Richardson-extrapolated
eigensolver that defines the band table, so the 1e-10 residual target is a
solve property, not a discretization claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .band import BandError, band_holomorphic, band_holomorphic_derivative
from .errors import SolverError

__all__ = [
    "EikonalSolution",
    "AgmonDistances",
    "f_profile",
    "solve_phi_at",
    "solve_eikonal",
    "agmon_distances",
    "eikonal_lower_bound_report",
]

_RESIDUAL_RTOL = 1e-10


def f_profile(sigma, s_well, gamma_vals, gamma0, nu0, k):
    """Signed square-root profile driving the eikonal solution.

    f(sigma) = sign(sigma - s_well) sqrt(nu0) sqrt(1 - (gamma0/gamma)^(2/(k+2))),
    analytic through the well because gamma has a non-degenerate minimum there.
    """
    ratio = (gamma0 / gamma_vals) ** (2.0 / (k + 2))
    arg = 1.0 - ratio
    if np.min(arg) < -1e-12:
        raise SolverError(f"gamma < gamma0 beyond tolerance: min(1-ratio) = {np.min(arg):.2e}")
    arg = np.clip(arg, 0.0, None)
    return np.sign(sigma - s_well) * math.sqrt(nu0) * np.sqrt(arg)


def _seed_coefficients(table):
    """(b1, b2) of phi = b1 f + i b2 f^2 + O(f^3) from the band Taylor data.

    b1 = sqrt(2/nu''(xi0)); b2 = -nu'''(xi0) / (3 nu''(xi0)^2), obtained by
    inverting the square-root factorization of the shifted band.
    """
    nu_dd = table.nu0_dd
    nu_d3 = table.nu0_d3
    b1 = math.sqrt(2.0 / nu_dd)
    b2 = -nu_d3 / (3.0 * nu_dd ** 2)
    return b1, b2


def solve_phi_at(model, table, target, phi_seed, seed_key, max_newton=12):
    """One Newton solve of nu(xi0 + i phi) = target from the given seed.

    Cheap Taylor-model iterations first (when inside the trust region), then
    polishing steps on the extrapolated eigensolver itself.  Returns
    (phi, residual).
    """
    xi0 = table.xi0
    phi = complex(phi_seed)
    # Taylor warm-up
    for _ in range(max_newton):
        z = xi0 + 1j * phi
        if abs(z - xi0) > 0.9 * table.taylor_radius:
            break
        val = band_holomorphic(table, z) - target
        if abs(val) < 1e-13 * table.nu0:
            break
        dval = 1j * band_holomorphic_derivative(table, z)
        if dval == 0:
            break
        phi = phi - val / dval
    # eigensolver polish; accept at the evaluator's reproducibility floor
    # (near the band minimum the derivative vanishes and Newton would
    # amplify solver noise into wild steps)
    floor = 5e-12 * table.nu0
    residual = None
    for _ in range(max_newton):
        nu, dnu = model.nu_complex(xi0 + 1j * phi, seed_key=seed_key, with_derivative=True)
        val = nu - target
        residual = abs(val)
        if residual <= floor:
            return phi, residual
        denom = 1j * dnu
        if denom == 0:
            raise SolverError("vanishing band derivative in the eikonal Newton solve")
        step = val / denom
        if abs(step) > 0.2:
            if residual <= _RESIDUAL_RTOL * table.nu0:
                return phi, residual
            raise SolverError(
                f"eikonal Newton step out of trust region (|step| = {abs(step):.2e})"
            )
        phi = phi - step
    nu = model.nu_complex(xi0 + 1j * phi, seed_key=seed_key)
    residual = abs(nu - target)
    if residual > _RESIDUAL_RTOL * table.nu0:
        raise SolverError(f"eikonal Newton did not converge (residual {residual:.2e})")
    return phi, residual


def _march_segment(model, table, sigma_seg, f_seg, gamma_seg, seed_key):
    """Solve the eikonal equation along one uniform segment starting at the well."""
    b1, b2 = _seed_coefficients(table)
    nu0 = table.nu0
    k = table.k
    phis = np.zeros(sigma_seg.size, dtype=complex)
    residuals = np.zeros(sigma_seg.size)
    model.reset_sweep(seed_key)
    prev = None
    for i in range(sigma_seg.size):
        f = f_seg[i]
        if i == 0:
            phis[0] = 0.0
            residuals[0] = abs(model.nu_complex(table.xi0, seed_key=seed_key) - nu0)
            prev = 0.0 + 0.0j
            continue
        seed = prev + (b1 * (f - f_seg[i - 1]) + 1j * b2 * (f ** 2 - f_seg[i - 1] ** 2))
        # nu0 (gamma0/gamma)^{2/(k+2)} = nu0 - f^2 by construction of f
        target = nu0 - f * f
        try:
            phi, res = solve_phi_at(model, table, target, seed, seed_key)
        except (SolverError, BandError) as exc:
            raise SolverError(f"eikonal solve failed at sigma = {sigma_seg[i]:.6f}: {exc}") from exc
        if prev is not None and abs(phi - prev) > 0.2 + 2.0 * abs(b1 * (f - f_seg[i - 1])):
            raise SolverError(f"branch jump detected at sigma = {sigma_seg[i]:.6f}")
        phis[i] = phi
        residuals[i] = res
        prev = phi
    return phis, residuals


@dataclass
class EikonalSolution:
    """Eikonal data for one well on its half-arc.

    sigma is ascending and contains the well point exactly; for the right
    well it spans [-L, 0], for the left well [0, L].  Profiles: f (signed
    square-root), phi (complex phase density), Phi (Agmon primitive, zero at
    the well), g (phase primitive, zero at sigma = anchor), w (complexified
    frequency), all sampled on sigma.
    """

    side: str
    k: int
    s_well: float
    well_index: int
    sigma: np.ndarray
    f_vals: np.ndarray
    phi: np.ndarray
    Phi: np.ndarray
    g: np.ndarray
    w: np.ndarray
    gamma_vals: np.ndarray
    residual_max: float
    anchor: float  # sigma at which g vanishes (0 for both wells)

    def value_at_index(self, idx):
        return dict(sigma=self.sigma[idx], phi=self.phi[idx], Phi=self.Phi[idx],
                    g=self.g[idx], w=self.w[idx])

    def phi_slope_at_well(self):
        """d(phi)/d(sigma) at the well from a centered five-point stencil."""
        i = self.well_index
        h = self.sigma[i + 1] - self.sigma[i]
        if i < 2 or i > self.sigma.size - 3:
            raise SolverError("well too close to the segment boundary for a slope estimate")
        hm = self.sigma[i] - self.sigma[i - 1]
        if abs(hm - h) > 1e-9 * h:
            raise SolverError("non-uniform stencil at the well")
        p = self.phi
        return (-p[i + 2] + 8 * p[i + 1] - 8 * p[i - 1] + p[i - 2]) / (12 * h)

    def Phi_second_derivative_at_well(self):
        """Phi''(s_well) from differentiating gamma^(1/(k+2)) Re phi."""
        i = self.well_index
        h = self.sigma[i + 1] - self.sigma[i]
        integrand = self.gamma_vals ** (1.0 / (self.k + 2)) * np.real(self.phi)
        return (-integrand[i + 2] + 8 * integrand[i + 1]
                - 8 * integrand[i - 1] + integrand[i - 2]) / (12 * h)

    def endpoint(self, which):
        """Profile values at the arc ends: 'inner' is sigma = 0, 'outer' is -L or +L."""
        if self.side == "right":
            idx = -1 if which == "inner" else 0
        else:
            idx = 0 if which == "inner" else -1
        return self.value_at_index(idx)

    def to_csv(self):
        header = "s,f,re_phi,im_phi,Phi,g,re_w,im_w"
        rows = [header]
        for i in range(self.sigma.size):
            rows.append(",".join(repr(float(v)) for v in (
                self.sigma[i], self.f_vals[i], self.phi[i].real, self.phi[i].imag,
                self.Phi[i], self.g[i], self.w[i].real, self.w[i].imag)))
        return "\n".join(rows) + "\n"


def _uniform_arc(s_well, ends, target_h):
    """Uniform grid over [ends[0], ends[1]] containing s_well exactly.

    Both sub-segments share a common spacing so centered stencils straddle
    the well.
    """
    lo, hi = ends
    n_lo = max(8, int(round((s_well - lo) / target_h)))
    n_hi = max(8, int(round((hi - s_well) / target_h)))
    h = min((s_well - lo) / n_lo, (hi - s_well) / n_hi)
    n_lo = int(round((s_well - lo) / h))
    n_hi = int(round((hi - s_well) / h))
    h_lo = (s_well - lo) / n_lo
    h_hi = (hi - s_well) / n_hi
    down = s_well - h_lo * np.arange(n_lo + 1)   # well -> lo, descending
    up = s_well + h_hi * np.arange(n_hi + 1)     # well -> hi, ascending
    return down, up


def solve_eikonal(profile, table, side="right", target_h=0.02):
    """Solve the eikonal problem for one well over its half-arc.

    Right well: arc [-L, 0] with the well at s_r; left well: arc [0, L] with
    the well at s_l (solved independently; symmetry is then a checkable
    property, not an assumption).
    """
    k = table.k
    L = profile.L
    if side == "right":
        s_well, ends = profile.s_r, (-L, 0.0)
    elif side == "left":
        s_well, ends = profile.s_l, (0.0, L)
    else:
        raise ValueError("side must be 'right' or 'left'")

    down, up = _uniform_arc(s_well, ends, target_h)
    gamma_down = profile.gamma_at(down)
    gamma_up = profile.gamma_at(up)
    f_down = f_profile(down, s_well, gamma_down, profile.gamma0, table.nu0, k)
    f_up = f_profile(up, s_well, gamma_up, profile.gamma0, table.nu0, k)

    model = table.model()
    phi_down, res_down = _march_segment(model, table, down, f_down, gamma_down,
                                        seed_key=f"eik-{side}-down")
    phi_up, res_up = _march_segment(model, table, up, f_up, gamma_up,
                                    seed_key=f"eik-{side}-up")

    power = 1.0 / (k + 2)

    def cum_from_start(sig, y):
        """Cumulative Simpson integral along sig (ascending or descending),
        zero at sig[0]."""
        if sig[1] > sig[0]:
            return cumulative_simpson(y, x=sig, initial=0.0)
        c = cumulative_simpson(y[::-1], x=sig[::-1], initial=0.0)
        return (c - c[-1])[::-1]

    Phi_down = cum_from_start(down, gamma_down ** power * np.real(phi_down))
    Phi_up = cum_from_start(up, gamma_up ** power * np.real(phi_up))

    # phase primitive, anchored at sigma = 0 (the inner endpoint of either arc)
    g_down = cum_from_start(down, gamma_down ** power * (table.xi0 - np.imag(phi_down)))
    g_up = cum_from_start(up, gamma_up ** power * (table.xi0 - np.imag(phi_up)))
    # g is measured from sigma=0: for the right well, 0 is the end of `up`;
    # for the left well, 0 is the end of `down`.
    if side == "right":
        g_shift = g_up[-1]
        g_up = g_up - g_shift
        g_down = g_down - g_shift
    else:
        g_shift = g_down[-1]
        g_down = g_down - g_shift
        g_up = g_up - g_shift

    # merge descending+ascending into one ascending array (well appears once)
    sigma = np.concatenate([down[::-1], up[1:]])
    f_all = np.concatenate([f_down[::-1], f_up[1:]])
    phi_all = np.concatenate([phi_down[::-1], phi_up[1:]])
    Phi_all = np.concatenate([Phi_down[::-1], Phi_up[1:]])
    g_all = np.concatenate([g_down[::-1], g_up[1:]])
    gamma_all = np.concatenate([gamma_down[::-1], gamma_up[1:]])
    w_all = gamma_all ** power * (table.xi0 + 1j * phi_all)

    if np.min(Phi_all) < -1e-10:
        raise SolverError(f"negative Agmon primitive: min = {np.min(Phi_all):.2e}")

    return EikonalSolution(
        side=side, k=k, s_well=s_well, well_index=down.size - 1,
        sigma=sigma, f_vals=f_all, phi=phi_all, Phi=Phi_all, g=g_all,
        w=w_all, gamma_vals=gamma_all,
        residual_max=float(max(res_down.max(), res_up.max())),
        anchor=0.0,
    )


@dataclass
class AgmonDistances:
    S_u: float
    S_d: float

    @property
    def S(self):
        return min(self.S_u, self.S_d)

    def to_dict(self):
        return {"S_u": self.S_u, "S_d": self.S_d, "S": self.S}


def agmon_distances(right, left, mismatch_warn=1e-6):
    """Agmon distances of the two arcs joining the wells.

    Up arc (through sigma = 0): S_u = Phi_r(0) + Phi_l(0); down arc (through
    +-L): S_d = Phi_r(-L) + Phi_l(L).  Returns (distances, diagnostics); the
    diagnostics record the mismatch of the decay densities where the two
    one-well solutions meet.
    """
    if right.side != "right" or left.side != "left":
        raise ValueError("pass the right-well and left-well solutions in order")
    S_u = right.Phi[-1] + left.Phi[0]
    S_d = right.Phi[0] + left.Phi[-1]
    dens_r0 = right.gamma_vals[-1] ** (1.0 / (right.k + 2)) * right.phi[-1].real
    dens_l0 = left.gamma_vals[0] ** (1.0 / (left.k + 2)) * (-left.phi[0].real)
    mism_up = abs(dens_r0 - dens_l0)
    dens_rL = right.gamma_vals[0] ** (1.0 / (right.k + 2)) * (-right.phi[0].real)
    dens_lL = left.gamma_vals[-1] ** (1.0 / (left.k + 2)) * left.phi[-1].real
    mism_down = abs(dens_rL - dens_lL)
    diag = {
        "density_mismatch_at_0": float(mism_up),
        "density_mismatch_at_L": float(mism_down),
        "warn": bool(max(mism_up, mism_down) > mismatch_warn),
    }
    return AgmonDistances(S_u=float(S_u), S_d=float(S_d)), diag


def decay_profile(right, left):
    """Positive decay density D(sigma) on [-L, L] assembled from both wells.

    D = -Re phi_r on [-L, s_r], +Re phi_r on [s_r, 0], -Re phi_l on [0, s_l],
    +Re phi_l on [s_l, L].
    """
    sig_r, sig_l = right.sigma, left.sigma
    d_r = np.where(sig_r >= right.s_well, 1.0, -1.0) * np.real(right.phi)
    d_l = np.where(sig_l >= left.s_well, 1.0, -1.0) * np.real(left.phi)
    sigma = np.concatenate([sig_r, sig_l[1:]])
    D = np.concatenate([d_r, d_l[1:]])
    imag = np.concatenate([np.imag(right.phi), np.imag(left.phi)[1:]])
    return sigma, D, imag


def eikonal_lower_bound_report(sol):
    """Pointwise comparison of Phi'(sigma) with nu0 (gamma^a - gamma0^a), a = 2/(k+2).

    The printed lower bound is recorded, not enforced (its two sides scale
    differently in the small-variability regime); returns the margin profile.
    """
    k = sol.k
    a = 2.0 / (k + 2)
    power = 1.0 / (k + 2)
    Phi_prime = sol.gamma_vals ** power * np.abs(np.real(sol.phi))
    gamma0 = sol.gamma_vals[sol.well_index]
    rhs_raw = sol.gamma_vals ** a - gamma0 ** a
    return {
        "sigma": sol.sigma,
        "Phi_prime": Phi_prime,
        "rhs_without_nu0": rhs_raw,
    }
