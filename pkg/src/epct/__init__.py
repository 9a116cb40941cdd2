"""Critical-threshold experiments for the 2-D pressureless Euler-Poisson system.

The library verifies, numerically, a family of sufficient conditions for
global smooth solutions of the reduced Riccati-type system that governs
the velocity divergence along particle paths.
"""

from .core_types import (
    AuxState,
    Envelope,
    EnvelopeSpec,
    GradientDecomposition,
    PhaseState,
    ScalarField2D,
    ThresholdParams,
    decompose_gradient,
    make_threshold_params,
)
from .dynamics import (
    AdmissibleFamily,
    CoefficientTrajectory,
    rhs_aux,
    rhs_lagrangian,
    rhs_reduced,
    run_comparison,
    simulate_aux,
    simulate_reduced,
    sweep_classify,
    upper_bound_d,
)
from .errors import EPCTError, ValidationError
from .geometry import SurfaceFuncs, root_Rstar, rest_point_astar, verify_lemma
from .ode import OdeResult, Status, integrate
from .riesz import A_of_t, forcing_fields, riesz_apply
from .thresholds import ThresholdRegion, find_feasible_params, membership, region_boundary

__version__ = "0.1.0"

__all__ = [
    "A_of_t",
    "AdmissibleFamily",
    "AuxState",
    "CoefficientTrajectory",
    "EPCTError",
    "Envelope",
    "EnvelopeSpec",
    "GradientDecomposition",
    "OdeResult",
    "PhaseState",
    "ScalarField2D",
    "Status",
    "SurfaceFuncs",
    "ThresholdParams",
    "ThresholdRegion",
    "ValidationError",
    "decompose_gradient",
    "find_feasible_params",
    "forcing_fields",
    "integrate",
    "make_threshold_params",
    "membership",
    "region_boundary",
    "rest_point_astar",
    "rhs_aux",
    "rhs_lagrangian",
    "rhs_reduced",
    "riesz_apply",
    "root_Rstar",
    "run_comparison",
    "simulate_aux",
    "simulate_reduced",
    "sweep_classify",
    "upper_bound_d",
    "verify_lemma",
]
