"""Quasiregular interpolation of power maps.

Builds entire-function models h that equal c_j z^{M_j} on nested annuli and
interpolate between consecutive degrees by folding, then checks their
quasiregularity, singular values and wandering annuli numerically.
"""
from .analysis import (BeltramiSample, beltrami_estimate, dilatation_report, integral_bound,
                       winding_number)
from .dynamics import OrbitTrace, annulus_A, orbit, truncated_orbit_compare, verify_wandering
from .errors import PowerInterpError
from .folding import (CellMap, FoldRegion, branched_data, build_cell, build_fold_region, eta,
                      g_annulus, psi, sigma, tau)
from .globalmap import (GlobalMap, RegionKind, RegionTag, SingularData, classify,
                        disk_mode_domain, h, h_truncated, singular_data)
from .logpoint import ORIGIN, LogPoint
from .sequences import (GrowthRule, Params, generate_standard_family, is_strongly_permissible,
                        scaling_constants, validate)

__version__ = "0.1.0"

__all__ = [
    "BeltramiSample", "CellMap", "FoldRegion", "GlobalMap", "GrowthRule", "LogPoint", "ORIGIN",
    "OrbitTrace", "Params", "PowerInterpError", "RegionKind", "RegionTag", "SingularData",
    "annulus_A", "beltrami_estimate", "branched_data", "build_cell", "build_fold_region",
    "classify", "dilatation_report", "disk_mode_domain", "eta", "g_annulus",
    "generate_standard_family", "h", "h_truncated", "integral_bound", "is_strongly_permissible",
    "orbit", "psi", "scaling_constants", "sigma", "singular_data", "tau",
    "truncated_orbit_compare", "validate", "verify_wandering", "winding_number",
]
