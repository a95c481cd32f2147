"""Exception hierarchy.

Errors split into two groups that the command line maps to distinct exit
codes: bad input (exit 2) and numerical failure (exit 3).
"""


class QGraphError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(QGraphError, ValueError):
    """Arguments violate an operation's preconditions."""


class DimensionError(InvalidInputError):
    pass


class InvalidMomentumError(InvalidInputError):
    pass


class NotApplicableError(InvalidInputError):
    """The requested formula does not apply to the given coupling/parameters."""


class NumericalError(QGraphError, ArithmeticError):
    """A computation hit a singularity or lost precision."""


class SingularCouplingError(NumericalError):
    pass


class ResonanceError(NumericalError):
    """Evaluation at (or too close to) a pole of the amplitudes."""


class LatticeSingularityError(NumericalError):
    pass
