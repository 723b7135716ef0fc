"""Free-contour scalar Riemann-Hilbert engine for semiclassical NLS
branchpoint tracking: scattering function evaluation with exact branch-cut
semantics, hyperelliptic loop quadrature, modulation-system Newton solves,
parameter continuation, and sign-condition genus checks."""

from .params import ProblemParams, Side, Tolerances
from .geometry import BranchpointSet, Radical, build_contour, extend_gamma_inf
from .rhp_core import RhpSolution, solve_rhp
from .modulation import SolveReport, newton_solve, seed_from_config
from .continuation import ContinuationTrace, dalpha_dmu, dalpha_dx, dalpha_dt, sweep
from .analysis import SignReport, check_signs, detect_genus

__all__ = [
    "ProblemParams", "Side", "Tolerances",
    "BranchpointSet", "Radical", "build_contour", "extend_gamma_inf",
    "RhpSolution", "solve_rhp",
    "SolveReport", "newton_solve", "seed_from_config",
    "ContinuationTrace", "dalpha_dmu", "dalpha_dx", "dalpha_dt", "sweep",
    "SignReport", "check_signs", "detect_genus",
]

__version__ = "0.1.0"
