"""Exception hierarchy shared by every module of the package."""


class CertificationError(Exception):
    """Base class: some certified quantity could not be produced."""


class DomainError(CertificationError, ValueError):
    """Argument outside the domain of the requested function."""


class NonConvergence(CertificationError):
    """An iterative or adaptive procedure ran out of budget."""


class DivergenceAtArgument(CertificationError):
    """An asymptotic series is not usable at the requested argument."""


class NoSignChange(CertificationError):
    """Bisection endpoints do not carry certified opposite signs."""


class OverflowRefusal(CertificationError):
    """The x-scaled form of a quantity is requested for an x that only lives in log space."""


class TailUnbounded(CertificationError):
    """A monotone tail certificate failed."""


class ThresholdAboveAnchor(CertificationError):
    """The certified threshold lies above log(e * x1)."""

    def __init__(self, message, threshold=None):
        super().__init__(message)
        self.threshold = threshold


class ResourceLimit(CertificationError):
    """A sieve request exceeds the configured ceiling."""


class UndecidedFloor(CertificationError):
    """The enclosure of x/alpha contains an integer, so its floor is not certified."""
