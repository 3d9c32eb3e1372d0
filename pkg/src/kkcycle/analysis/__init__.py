"""Analytic toolkit: transforms, Sobolev chain, norm ladders and distances."""

from .distance import (
    DistanceProblem,
    DistanceResult,
    SolverOptions,
    circle_problem,
    connes_distance,
    discrete_problem,
    two_point_problem,
)
from .reports import kasparov_conditions_report, ladder_csv, ladder_json
from .sobolev import (
    SobolevChain,
    SobolevLevel,
    connection_transversality_norms,
    graded_ad,
    pi_theta_reps,
    relative_boundedness_norms,
    sobolev_chain,
)
from .transform import (
    bounded_transform,
    functional_calculus,
    graph_isometry,
    projection_residuals,
    woronowicz_projection,
)

__all__ = [
    "DistanceProblem",
    "DistanceResult",
    "SolverOptions",
    "circle_problem",
    "connes_distance",
    "discrete_problem",
    "two_point_problem",
    "kasparov_conditions_report",
    "ladder_csv",
    "ladder_json",
    "SobolevChain",
    "SobolevLevel",
    "connection_transversality_norms",
    "graded_ad",
    "pi_theta_reps",
    "relative_boundedness_norms",
    "sobolev_chain",
    "bounded_transform",
    "functional_calculus",
    "graph_isometry",
    "projection_residuals",
    "woronowicz_projection",
]
