"""Exception and warning types shared across the package."""


class MoserFormError(Exception):
    """Base class for all engine errors."""

    code = "engine_error"


class ConfigurationError(MoserFormError, ValueError):
    code = "configuration_error"


class PreconditionError(MoserFormError, ValueError):
    code = "precondition_violation"


class DivergentImproperIntegral(MoserFormError, ArithmeticError):
    """An integral over [t, inf) was requested for a non-decaying integrand."""

    code = "divergent_improper_integral"


class UnboundedOnHalfLine(MoserFormError, ArithmeticError):
    """A coefficient has no finite supremum on t >= 0."""

    code = "unbounded_on_half_line"


class HypothesisViolation(MoserFormError):
    """The frequency function g left the band omega/2 <= Re g <= |g| <= 3 omega/2."""

    code = "hypothesis_violation"


class DomainWarning(UserWarning):
    """A point was mapped outside the configured polydisk."""
