"""
Exception hierarchy for the beta-splitting toolkit
Command handlers map DomainError to exit code 1 and the numerical and
resource failures to exit code 2.
"""


class BetaSplitError(Exception):
    """Base class for every error raised by the toolkit"""


class DomainError(BetaSplitError, ValueError):
    """Argument outside the domain of an operation"""


class PoleArgumentError(DomainError):
    """Argument within pole tolerance of a singularity"""


class UnsupportedOrderError(DomainError):
    """Derivative order beyond what the public API supports"""


class InsufficientRootsError(DomainError):
    """Root table too short for the requested pole count"""


class PoleProximityError(DomainError):
    """Contour abscissa too close to a pole of the integrand"""


class NumericalContractError(BetaSplitError, ArithmeticError):
    """Computation could not meet its stated accuracy contract"""


class QuadratureNonConvergenceError(NumericalContractError):
    pass


class SeriesTruncationError(NumericalContractError):
    pass


class PrecisionError(NumericalContractError):
    pass


class ResourceError(BetaSplitError):
    """A configured size budget would be exceeded"""
