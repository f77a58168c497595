"""Exception types raised across the package."""


class DegenerateJump(ValueError):
    """Momentum-shift direction is undefined (zero momentum or zero coupling)."""


class NonFiniteState(FloatingPointError):
    """An integrator step produced NaN or infinite phase-space coordinates."""


class IncompleteEnsemble(LookupError):
    """Some sample has no snapshot at the requested time."""


class VanishingTrace(ZeroDivisionError):
    """The ensemble trace fell below the numerical floor; normalization is undefined."""


class InsufficientData(ValueError):
    """Too few points for a spectral estimate."""


class ConfigError(ValueError):
    """Invalid configuration key or value."""


class RunFailed(RuntimeError):
    """Too many samples aborted for the ensemble averages to be trusted."""
