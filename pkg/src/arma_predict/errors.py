"""Exception hierarchy.

Every numerical failure raised by the library derives from ``ArmaError``;
the command line maps those to exit status 1 and ``ModelFileError`` to 2.
"""


class ArmaError(Exception):
    """Base class for all library errors."""


class ModelFileError(ArmaError, ValueError):
    """Model file could not be parsed or has an invalid shape."""


class SingularSigma(ArmaError, ValueError):
    pass


class NotStable(ArmaError, ValueError):
    """A root of a determinant lies in the closed unit disk."""


class PoleClusterAmbiguous(ArmaError):
    pass


class DegenerateLeadingResidue(ArmaError):
    pass


class NearPole(ArmaError, ValueError):
    pass


class InsufficientSharpData(ArmaError, ValueError):
    pass


class TailNotConverged(ArmaError):
    pass


class NoConvergence(ArmaError):
    """An iteration stopped short of its target; ``residual`` is the last value."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class GridTooCoarse(ArmaError):
    pass


class IllConditionedBasis(ArmaError):
    pass


class ResidualTooLarge(ArmaError):
    pass


class NearPoleDifferentiation(ArmaError):
    pass


class NeumannDiverged(ArmaError, ArithmeticError):
    pass


class NotPositiveDefinite(ArmaError, ArithmeticError):
    pass


class TruncationInsufficient(ArmaError):
    pass


class AssumptionP1MaxViolated(ArmaError):
    """The pole of largest modulus is not unique."""
