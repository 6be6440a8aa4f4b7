"""Shared fixtures: band tables and the bundled two-well corpora.

Everything heavy is session-scoped; the acceptance module layers its own
campaign fixtures on top of these.
"""

import numpy as np
import pytest

from magtunnel.band import build_band_table, default_grid
from magtunnel.eikonal import agmon_distances, solve_eikonal
from magtunnel.geometry import CurveSpec, FieldSpec, build_geometry
from magtunnel.wkb import compute_wkb_constants

SYMMETRIC_FIELD = "(1 - x1^2 - x2^2)*(1 + 0.25*x2^2)*(1 + 0.6*(1 - x1^2 - x2^2))"
ASYMMETRIC_FIELD = "(1 - x1^2 - x2^2)*(1 + 0.25*x2^2 + 0.1*x2^3)*(1 + 0.6*(1 - x1^2 - x2^2))"


@pytest.fixture(scope="session")
def band_k1():
    return build_band_table(1, (0.0, 1.0), default_grid(1))


@pytest.fixture(scope="session")
def band_k2():
    return build_band_table(2, (-1.0, 1.0), default_grid(2))


@pytest.fixture(scope="session")
def unit_circle():
    return CurveSpec(kind="circle", radius=1.0)


@pytest.fixture(scope="session")
def corpus_profile(unit_circle):
    field = FieldSpec(expression=SYMMETRIC_FIELD, k=1)
    return build_geometry(unit_circle, field, n_samples=1024)


@pytest.fixture(scope="session")
def corpus_profile_asym(unit_circle):
    field = FieldSpec(expression=ASYMMETRIC_FIELD, k=1)
    return build_geometry(unit_circle, field, n_samples=1024)


@pytest.fixture(scope="session")
def corpus_eikonal(corpus_profile, band_k1):
    right = solve_eikonal(corpus_profile, band_k1, "right", target_h=0.02)
    left = solve_eikonal(corpus_profile, band_k1, "left", target_h=0.02)
    distances, diag = agmon_distances(right, left)
    return right, left, distances, diag


@pytest.fixture(scope="session")
def corpus_constants(corpus_profile, band_k1, corpus_eikonal):
    right = corpus_eikonal[0]
    return compute_wkb_constants(corpus_profile, band_k1, right)


@pytest.fixture(scope="session")
def corpus_eikonal_asym(corpus_profile_asym, band_k1):
    right = solve_eikonal(corpus_profile_asym, band_k1, "right", target_h=0.02)
    left = solve_eikonal(corpus_profile_asym, band_k1, "left", target_h=0.02)
    distances, diag = agmon_distances(right, left)
    return right, left, distances, diag


@pytest.fixture(scope="session")
def corpus_constants_asym(corpus_profile_asym, band_k1, corpus_eikonal_asym):
    right = corpus_eikonal_asym[0]
    return compute_wkb_constants(corpus_profile_asym, band_k1, right)


class ConstantGammaProfile:
    """Synthetic profile with gamma identically gamma0 (degenerate-well fixture)."""

    def __init__(self, gamma0=1.0, L=np.pi):
        self.L = L
        self.gamma0 = gamma0
        self.s_r = -L / 2
        self.s_l = L / 2

    def gamma_at(self, s):
        return np.full_like(np.asarray(s, dtype=float), self.gamma0)


@pytest.fixture()
def const_gamma_profile():
    return ConstantGammaProfile()
