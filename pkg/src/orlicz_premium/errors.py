"""Exception types raised by the numerical core."""


class OrliczPremiumError(Exception):
    """Base class for domain errors."""


class QuadratureInconclusive(OrliczPremiumError):
    """An integral neither converged nor was confidently divergent."""


class NotInOrliczSpace(OrliczPremiumError):
    """The variable has no finite gauge expectation for any scale."""


class MembershipInconclusive(OrliczPremiumError):
    """The membership scan hit its bounds or an inconclusive quadrature."""
