"""Exception hierarchy shared by every numerical module."""


class XisbError(Exception):
    """Base class for all library errors."""


class DomainError(XisbError, ValueError):
    """Argument outside the domain of the function."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole."""


class NumericalInstability(XisbError):
    """A computed quantity violated a consistency guard."""


class QuadratureBudgetExceeded(XisbError):
    """Adaptive quadrature ran out of nodes before meeting its tolerance."""


class TailNotCertified(XisbError):
    """Sampled integrand magnitudes contradict the declared decay bound,
    or the available data does not reach far enough to truncate safely."""


class GridTooShort(XisbError):
    """A tabulated profile does not extend far enough for the requested weight."""


# Errors that indicate numerical plumbing failed, as opposed to an identity
# check coming out false.
INFRASTRUCTURE_ERRORS = (
    NumericalInstability,
    QuadratureBudgetExceeded,
    TailNotCertified,
    GridTooShort,
)
