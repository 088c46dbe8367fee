"""Time-dependent Moser normal forms for aperiodically perturbed hyperbolic equilibria."""
from __future__ import annotations

from .errors import (
    ConfigurationError,
    DivergentImproperIntegral,
    DomainWarning,
    HypothesisViolation,
    MoserFormError,
    PreconditionError,
    UnboundedOnHalfLine,
)
from .homological import HomologicalProblem, solve
from .lie import LieTransform, exp_lie, lie_derivative, transformed_perturbation
from .normalizer import NormalFormResult, NormalizationLedger, NormalizerConfig, invert_and_compose, run, step
from .pqseries import MoserHamiltonian, PQSeries, XSeries, taylor_norm
from .timecoeff import ExpPoly, RateBasis

__all__ = [
    "ConfigurationError", "DivergentImproperIntegral", "DomainWarning", "ExpPoly", "HomologicalProblem",
    "HypothesisViolation", "LieTransform", "MoserFormError", "MoserHamiltonian", "NormalFormResult",
    "NormalizationLedger", "NormalizerConfig", "PQSeries", "PreconditionError", "RateBasis",
    "UnboundedOnHalfLine", "XSeries", "exp_lie", "invert_and_compose", "lie_derivative", "run", "solve",
    "step", "taylor_norm", "transformed_perturbation",
]
