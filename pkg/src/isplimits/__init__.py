"""Iterative scaling limits: matrix scaling to target marginals, exact
feasibility analysis, and direct computation of the two limit points."""

from .core import (
    Block,
    Decomposition,
    Problem,
    Splitting,
    SupportPattern,
    marginal_sum,
    mediant_bounds,
    neighborhood,
    validate_problem,
)
from .decompose import LimitPair, PhiResult, decompose, limit_pair, phi, prune, step_one, step_two
from .feasibility import (
    HallCertificate,
    build_network,
    flexible_support,
    hall_check,
    max_flow,
    max_gap_set,
)
from .scaling import check_diag_equivalent, col_adjust, isp_run, row_adjust

__all__ = [
    "Block",
    "Decomposition",
    "HallCertificate",
    "LimitPair",
    "PhiResult",
    "Problem",
    "Splitting",
    "SupportPattern",
    "build_network",
    "check_diag_equivalent",
    "col_adjust",
    "decompose",
    "flexible_support",
    "hall_check",
    "isp_run",
    "limit_pair",
    "marginal_sum",
    "max_flow",
    "max_gap_set",
    "mediant_bounds",
    "neighborhood",
    "phi",
    "prune",
    "row_adjust",
    "step_one",
    "step_two",
    "validate_problem",
]
