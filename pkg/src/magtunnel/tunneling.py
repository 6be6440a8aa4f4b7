"""Final splitting assembly: flux phase, interaction term, gap scan, and
leading eigenvalue asymptotics.

The two interfering contributions travel the upper and lower arcs between the
wells; each carries an Agmon damping exp(-S/h), an amplitude prefactor, the
velocity factor at the matching point, and the flux-driven phase exp(+-i L f).
With the configuration's x1 -> -x1 symmetry the outer velocity factor equals
-conj(inner), and the two arcs interfere as cos(L f - arg V) -- the relative
minus sign between the terms below is fixed by the boundary-matching
derivation and reproduces that cosine law.

All exponentials are evaluated in the log domain, so predictions stay finite
arbitrarily deep into the semiclassical regime.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "SplittingPrediction",
    "AsymptoticEnergy",
    "flux_phase",
    "interaction_term",
    "leading_asymptotics",
    "gap_scan",
]


@dataclass
class SplittingPrediction:
    hbar: float
    h: float                 # hbar^(1/(k+2))
    f_val: float
    up_term: complex         # may underflow to 0; see log fields
    down_term: complex
    w_tilde: complex
    gap: float
    log_gap: float           # log of the predicted gap, safe at tiny hbar
    log_up_mag: float
    log_down_mag: float

    def row(self):
        return (self.hbar, self.h, self.f_val, self.gap, self.log_gap)


@dataclass
class AsymptoticEnergy:
    hbar: float
    n: int
    lambda1_leading: float
    lambda_n_two_term: float | None


def flux_phase(hbar, profile, constants, right_sol):
    """Interference phase density f(hbar).

    f = beta0/hbar + g_r(-L) / (L hbar^(1/(k+2))) - alpha0, where g_r is the
    oscillatory phase primitive of the right-well solution; the product L f
    is the phase actually accumulated between the two matching points.
    """
    k = constants.k
    h = hbar ** (1.0 / (k + 2))
    L = profile.L
    g_outer = right_sol.endpoint("outer")["g"]
    return profile.beta0 / hbar + g_outer / (L * h) - constants.alpha0


def _log_terms(hbar, k, constants, distances):
    """Log-magnitudes of the two arc contributions (without phases).

    Power law: hbar^((2k + 5/2)/(k+2)).  The half-integer excess over the
    naive 2k+3 counting is the squared h^(-1/4) normalization of the two
    one-well WKB states meeting at the matching line; dropping it leaves a
    prediction/measurement ratio that drifts like h^(1/2), which the direct
    eigensolves of the reduced operator clearly resolve.
    """
    h = hbar ** (1.0 / (k + 2))
    log_pref = 0.5 * math.log(constants.zeta / math.pi) \
        + (2 * k + 2.5) / (k + 2) * math.log(hbar)
    log_up = log_pref + math.log(abs(constants.V_inner) * constants.A_u) \
        - distances.S_u / h
    log_down = log_pref + math.log(abs(constants.V_outer) * constants.A_d) \
        - distances.S_d / h
    return h, log_up, log_down


def interaction_term(hbar, profile, constants, distances, right_sol):
    """Predicted splitting at one hbar: gap = 2 |up_term + down_term|."""
    k = constants.k
    h, log_up, log_down = _log_terms(hbar, k, constants, distances)
    f_val = flux_phase(hbar, profile, constants, right_sol)
    theta = profile.L * f_val

    phase_up = cmath.exp(1j * theta) * _unit(np.conj(constants.V_inner))
    # boundary matching at -L contributes with the opposite sign
    phase_down = -cmath.exp(-1j * theta) * _unit(np.conj(constants.V_outer))

    log_ref = max(log_up, log_down)
    bracket = (math.exp(log_up - log_ref) * phase_up
               + math.exp(log_down - log_ref) * phase_down)
    log_gap = math.log(2.0) + log_ref + math.log(max(abs(bracket), 1e-300))

    up_term = _safe_exp(log_up) * phase_up
    down_term = _safe_exp(log_down) * phase_down
    w_tilde = up_term + down_term
    if abs(w_tilde) > 0.0:
        gap = 2.0 * abs(w_tilde)
    else:
        gap = _safe_exp(log_gap)
    return SplittingPrediction(
        hbar=hbar, h=h, f_val=f_val, up_term=up_term, down_term=down_term,
        w_tilde=w_tilde, gap=gap,
        log_gap=log_gap, log_up_mag=log_up, log_down_mag=log_down,
    )


def _unit(z):
    a = abs(z)
    return z / a if a > 0 else 1.0 + 0.0j


def _safe_exp(x):
    return math.exp(x) if x > -700 else 0.0


def leading_asymptotics(hbar, n, profile, table, constants):
    """Eigenvalue asymptotics of the full operator.

    Leading term: gamma0^(2/(k+2)) nu0 hbar^((2k+2)/(k+2)) for every k.  The
    two-term ladder (k = 1 only): lambda_n ~ leading + delta_{n,1} hbar^(5/3)
    with delta_{n,1} = nu0''/2 (2n-1) zeta + Re R(s_well).
    """
    k = table.k
    lambda1 = constants.delta10 * hbar ** ((2.0 * k + 2) / (k + 2))
    two_term = None
    if k == 1:
        d_n1 = 0.5 * table.nu0_dd * (2 * n - 1) * constants.zeta \
            + constants.R_at_well.real
        two_term = constants.delta10 * hbar ** (4.0 / 3.0) + d_n1 * hbar ** (5.0 / 3.0)
    elif n != 1:
        raise ValueError("two-term ladder is only available for k = 1")
    return AsymptoticEnergy(hbar=hbar, n=n, lambda1_leading=lambda1,
                            lambda_n_two_term=two_term)


def gap_scan(hbars, profile, constants, distances, right_sol,
             node_balance_tol=0.25):
    """Predictions over an hbar grid plus predicted interference nodes.

    A node is reported where the two arc contributions can actually cancel:
    the relative phase crosses pi (mod 2 pi) while the magnitudes agree within
    node_balance_tol.  Nodes are refined by bisection to ~1e-12 relative.
    """
    hbars = np.asarray(sorted(hbars), dtype=float)
    preds = [interaction_term(hb, profile, constants, distances, right_sol)
             for hb in hbars]

    arg_u = cmath.phase(_unit(np.conj(constants.V_inner)))
    arg_d = cmath.phase(-_unit(np.conj(constants.V_outer)))

    def cancel_indicator(hb):
        f_val = flux_phase(hb, profile, constants, right_sol)
        chi = 2.0 * profile.L * f_val + arg_u - arg_d - math.pi
        return math.sin(0.5 * chi)

    nodes = []
    for i in range(hbars.size - 1):
        a, b = hbars[i], hbars[i + 1]
        fa, fb = cancel_indicator(a), cancel_indicator(b)
        if fa == 0.0:
            candidates = [a]
        elif fa * fb < 0:
            candidates = [brentq(cancel_indicator, a, b, xtol=1e-14, rtol=1e-12)]
        else:
            continue
        for hstar in candidates:
            _, log_up, log_down = _log_terms(hstar, constants.k, constants, distances)
            if abs(log_up - log_down) <= abs(math.log(1.0 - node_balance_tol)):
                nodes.append(float(hstar))
    return preds, nodes


def scan_csv(preds, nodes):
    header = "hbar,h,f,gap_pred,log_gap_pred,node_flag"
    node_set = set(nodes)
    rows = [header]
    for p in preds:
        flag = int(any(abs(p.hbar - x) < 1e-12 for x in node_set))
        rows.append(",".join(repr(float(v)) for v in p.row()) + f",{flag}")
    for x in nodes:
        rows.append(f"# predicted node at hbar = {x!r}")
    return "\n".join(rows) + "\n"
