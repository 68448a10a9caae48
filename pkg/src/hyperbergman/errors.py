"""Exception hierarchy with CLI exit codes.

Exit-code convention: 2 usage, 3 data/validation, 4 numerical
non-convergence.  Plain bugs raise whatever they raise and surface as 1.
"""


class HyperbergmanError(Exception):
    exit_code = 1


class UsageError(HyperbergmanError):
    exit_code = 2


class DataValidationError(HyperbergmanError):
    exit_code = 3


class NumericalError(HyperbergmanError):
    exit_code = 4


# geometry

class DegeneratePointError(NumericalError):
    """A point's imaginary part underflowed to zero under a Mobius map."""


class InvalidTransformError(DataValidationError):
    """Matrix is not (projectively) in SL(2, R): nonpositive determinant."""


# group enumeration

class ThresholdExceedsRadiusError(DataValidationError):
    """Counting requested beyond the radius the ball was enumerated to."""


class NoHyperbolicElementError(DataValidationError):
    """No hyperbolic element found within the search radius."""


class UncertifiedSystoleError(NumericalError):
    """Search radius too small to certify the reported shortest geodesic."""


# bound evaluation

class NonpositiveRadiusError(DataValidationError):
    pass


class IncompleteBallError(DataValidationError):
    pass


class MismatchedBasepointsError(DataValidationError):
    pass


class DeltaTooSmallError(DataValidationError):
    """Tail-splitting parameter must exceed half the injectivity radius."""


# modular forms

class TruncationInsufficientError(NumericalError):
    """q-expansion tail bound exceeds the requested evaluation tolerance."""


class ReductionFailedError(NumericalError):
    """Point reduction did not terminate (should not happen for prime level)."""


class QuadratureNonconvergentError(NumericalError):
    pass


class GramNotPositiveDefiniteError(NumericalError):
    pass


# ingestion

class GenusTooSmallError(DataValidationError):
    """dim S_2(Gamma_0(N)) < 2; the comparison theory needs genus > 1."""


class SchemaMismatchError(DataValidationError):
    pass


class NetworkUnavailableError(DataValidationError):
    """Network fetch disabled or failed and no fixture covers the level."""


# product metrics

class PermutationPathTooLargeError(UsageError):
    """Literal permutation expansion is factorial in d; guarded at d <= 4."""
