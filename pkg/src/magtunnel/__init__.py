"""Numerical toolkit for magnetic tunneling with a field vanishing on a curve.

Pipeline: band (fiber-operator ground band) -> geometry (curve/field data on
the zero set) -> eikonal (complex phase and Agmon distances) -> wkb
(transport constants) -> tunneling (splitting prediction) -> validator
(direct eigensolves of the reduced operators).
"""

from .band import (
    BandTable,
    Grid1D,
    assemble_montgomery,
    band_hessian,
    band_holomorphic,
    build_band_table,
    complex_eigenpair,
    default_grid,
    lowest_real_eigs,
)
from .geometry import CurveSpec, FieldSpec, GeometryProfile, build_geometry
from .eikonal import EikonalSolution, AgmonDistances, solve_eikonal, agmon_distances
from .wkb import WkbConstants, compute_wkb_constants
from .tunneling import SplittingPrediction, flux_phase, interaction_term, gap_scan, leading_asymptotics

__version__ = "0.1.0"
