"""Numerical workbench for unbounded KK-cycles at finite truncation."""

from .algebras import (
    CircleAlgebra,
    FiniteAlgebra,
    TrigPoly,
    circle_derivative,
    factor_derivation,
    multiply,
    universal_derivation,
    universal_one_forms,
)
from .correspondences import (
    Correspondence,
    SpectralTriple,
    check_hermitian,
    check_leibniz,
    compare_up_to_iso,
    compose,
    external_product,
    lift_operator,
)
from .graded import (
    GradedOperator,
    GradedSpace,
    graded_tensor,
    operator_norm,
    spectrum,
)
from .nctorus import (
    TorusParams,
    build_circle_triple,
    build_clock_shift,
    build_fibration,
    build_torus_triple,
    verify_factorization,
)

__version__ = "0.1.0"

__all__ = [
    "CircleAlgebra",
    "FiniteAlgebra",
    "TrigPoly",
    "circle_derivative",
    "factor_derivation",
    "multiply",
    "universal_derivation",
    "universal_one_forms",
    "Correspondence",
    "SpectralTriple",
    "check_hermitian",
    "check_leibniz",
    "compare_up_to_iso",
    "compose",
    "external_product",
    "lift_operator",
    "GradedOperator",
    "GradedSpace",
    "graded_tensor",
    "operator_norm",
    "spectrum",
    "TorusParams",
    "build_circle_triple",
    "build_clock_shift",
    "build_fibration",
    "build_torus_triple",
    "verify_factorization",
]
