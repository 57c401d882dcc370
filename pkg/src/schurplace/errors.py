"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad input
(CLI exit code 2) and :class:`NumericalFailure` for breakdowns inside the
numerics (CLI exit code 3).
"""


class PolePlacementError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PolePlacementError, ValueError):
    pass


class NumericalFailure(PolePlacementError, ArithmeticError):
    pass


# -- input validation ---------------------------------------------------------

class RankDeficientInput(ValidationError):
    """The input matrix B does not have full column rank."""


class NotSymmetric(ValidationError):
    pass


class NotConjugateClosed(ValidationError):
    """A non-real pole is missing its conjugate (or multiplicities differ)."""


class DuplicateSplitGroup(ValidationError):
    """Equal poles are listed non-adjacently while keeping the given order."""


class DimensionMismatch(ValidationError):
    pass


class Uncontrollable(ValidationError):
    pass


# -- numerical breakdowns -----------------------------------------------------

class ConvergenceFailure(NumericalFailure):
    pass


class DependentVectors(NumericalFailure):
    """Two vectors expected to be linearly independent are not."""


class DependentRealImag(DependentVectors):
    """Real and imaginary parts of a complex vector are linearly dependent."""


class InsufficientRank(NumericalFailure):
    pass


class FeasibilityBreakdown(NumericalFailure):
    """A null space that should be nontrivial turned out empty.

    For a controllable pair this cannot happen in exact arithmetic, so the
    error usually means the input is uncontrollable or nearly so.
    """


class NumericalDegeneracy(NumericalFailure):
    pass


class SingularR(NumericalFailure):
    pass


class GenerationFailure(NumericalFailure):
    pass


class UnsupportedConfiguration(ValidationError):
    """The requested combination of inputs is outside what the solver handles."""
