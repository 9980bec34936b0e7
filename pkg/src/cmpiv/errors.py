"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class CmpivError(Exception):
    """Base class for all library errors."""


class DomainError(CmpivError, ValueError):
    """Argument outside the validated domain of a special function."""


class PoleError(DomainError):
    """Gamma-type function evaluated at one of its poles."""


class InvalidParameters(CmpivError, ValueError):
    """Problem parameters violate a hypothesis (e.g. alpha - 1/2 integer)."""


class NotSingularRegime(CmpivError):
    """kappa (kappa - kappa*) <= 0: the singular asymptotics do not apply."""


class SeparatrixError(NotSingularRegime):
    """|rho| = 1 to working precision, so b = -ln(|rho|^2 - 1)/(2 pi) is undefined."""


class NonConvergence(CmpivError):
    """An iterative solver exhausted its iteration budget."""


class NumericalFailure(CmpivError):
    """Base for integration failures; carries the abscissa where it happened."""

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


class StepFailure(NumericalFailure):
    """Step-size controller could not meet the tolerance."""


class SingularBreakdown(NumericalFailure):
    """Right-hand side evaluated at a genuinely singular state."""


class UnderflowError(NumericalFailure):
    """Boundary data too small to represent the solution faithfully."""


class MatchFailure(CmpivError):
    """A detected pole has no predicted partner within half the local spacing."""
