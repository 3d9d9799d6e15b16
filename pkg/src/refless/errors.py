"""Exception hierarchy.

Input problems derive from :class:`ValueError`; numerical failures derive
from :class:`NumericalError` so callers (and the CLI) can tell them apart.
"""


class ReflessError(Exception):
    """Base class for every error raised by the package."""


class InputError(ReflessError, ValueError):
    """Invalid arguments or violated preconditions."""


class NumericalError(ReflessError, ArithmeticError):
    """A numerical procedure could not meet its contract."""


class SlitInput(InputError):
    pass


class NonzeroShift(InputError):
    pass


class NotNormalized(InputError):
    pass


class GridMismatch(InputError):
    pass


class NotUpperHalfPlane(InputError):
    pass


class DomainExceeded(InputError):
    pass


class NonDifferentiableAlpha(InputError):
    pass


class NotEquivalent(ReflessError):
    """Verdict of :func:`refless.dirac.gauge_between` for inequivalent potentials."""


class GridTooCoarse(InputError):
    pass


class SingularH(InputError):
    pass


class DegenerateSystem(InputError):
    pass


class BadWeights(InputError):
    pass


class InsufficientCoefficients(InputError):
    pass


class InsufficientDepth(InputError):
    pass


class NotDiracClass(InputError):
    pass


class DegenerateEigenbasis(NumericalError):
    pass


class IntegrationFailure(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class ExtrapolationUnstable(NumericalError):
    pass


class RadiusTooLarge(NumericalError):
    pass


class BoundViolation(NumericalError):
    pass
