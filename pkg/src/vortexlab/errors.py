"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, NumericalAbort and its
subclasses -> 3, theory-check violations -> 4.
"""


class VortexLabError(Exception):
    """Base class for all package errors."""


class ConfigError(VortexLabError):
    """Invalid or inconsistent experiment configuration."""


class NumericalAbort(VortexLabError):
    """A run stopped because a numerical guard tripped."""


class CflViolation(NumericalAbort):
    """Requested time step exceeds the admissible CFL step."""


class SignViolation(NumericalAbort):
    """A definite-sign component developed sign errors beyond tolerance."""


class CollisionError(NumericalAbort):
    """Point vortices came closer than the collision floor."""


class TheoryCheckFailure(VortexLabError):
    """A closed-form inequality check found a violation."""
