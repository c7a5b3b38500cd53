"""Exception hierarchy for medea.

Numerical failures are kept distinct from config/usage errors so the CLI can
map them onto exit codes (2 = config, 3 = numerical).
"""


class MedeaError(Exception):
    """Base class for all library errors."""


class DomainError(MedeaError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class SpecialFunctionOverflow(MedeaError, OverflowError):
    """A special-function value exceeds the representable floating range."""

    def __init__(self, message, l=None, argument=None, layer=None):
        super().__init__(message)
        self.l = l
        self.argument = argument
        self.layer = layer


class QuadratureError(MedeaError, RuntimeError):
    """An adaptive quadrature failed to reach the requested tolerance."""


class SeriesTruncationError(MedeaError, RuntimeError):
    """A partial-wave sum hit its hard order cap before converging."""

    def __init__(self, message, l_cap=None, last_term=None):
        super().__init__(message)
        self.l_cap = l_cap
        self.last_term = last_term


class VolterraInstabilityError(MedeaError, RuntimeError):
    """The Volterra solution left the physical amplitude range (|C| > bound)."""


class GridExtrapolationError(MedeaError, ValueError):
    """A sampled kernel was asked for frequencies outside its tabulated grid."""


class GuardError(MedeaError, ValueError):
    """A validity guard of an asymptotic formula was violated."""
