"""Exception hierarchy.

Every error carries a short ``code`` so reports and the CLI can name the
failure without string matching on messages.
"""


class HalfOscError(Exception):
    code = "error"


# -- problem data ------------------------------------------------------------

class SpecError(HalfOscError, ValueError):
    """Raw equation data failed parsing or a standing hypothesis."""
    code = "spec_error"


class NonOddExponent(SpecError):
    code = "NonOddExponent"


class NonPositiveCoefficient(SpecError):
    code = "NonPositiveCoefficient"


class NegativeQ(SpecError):
    code = "NegativeQ"


class VanishingQ(SpecError):
    code = "VanishingQ"


class ArgumentNotAdvanced(SpecError):
    code = "ArgumentNotAdvanced"


class NonPositiveT0(SpecError):
    code = "NonPositiveT0"


class ExpressionError(SpecError):
    code = "ExpressionError"


class ConfigError(HalfOscError, ValueError):
    code = "ConfigError"


# -- numerics ----------------------------------------------------------------

class NonFiniteIntegrand(HalfOscError, ArithmeticError):
    code = "NonFiniteIntegrand"


class NonFiniteCriterionFunction(HalfOscError, ArithmeticError):
    code = "NonFiniteCriterionFunction"


class ToleranceNotMet(RuntimeWarning):
    """Issued (not raised) when adaptive subdivision hits its panel cap."""


# -- hypotheses of the oscillation theory --------------------------------------

class CanonicalOperator(HalfOscError):
    """A tail integral of an inverse coefficient power diverges."""
    code = "CanonicalOperator"


class UndecidedTail(HalfOscError):
    code = "UndecidedTail"


class HypothesisViolated(HalfOscError):
    code = "HypothesisViolated"


class HypothesisNotVerified(HalfOscError):
    code = "HypothesisNotVerified"


# -- closed forms ------------------------------------------------------------

class NonPositiveB(HalfOscError, ValueError):
    code = "NonPositiveB"


class BoundaryExponent(HalfOscError):
    code = "BoundaryExponent"


class ClosedFormUnavailable(BoundaryExponent):
    """The requested quantity has no finite power/log representation."""
    code = "ClosedFormUnavailable"


class NotEulerType(HalfOscError, ValueError):
    code = "NotEulerType"


# -- manufactured solutions --------------------------------------------------

class ManufactureError(HalfOscError):
    code = "ManufactureError"


class NegativeInducedQ(ManufactureError):
    code = "NegativeInducedQ"


class NonDecreasingY(ManufactureError):
    """Construction rejected: degenerate or outside the admissible sign table."""
    code = "NonDecreasingY"
