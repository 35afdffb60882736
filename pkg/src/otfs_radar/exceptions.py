"""Exception types shared across the package."""


class OtfsRadarError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatch(OtfsRadarError, ValueError):
    """Array shapes disagree with the frame grid or with each other."""


class TargetOutOfRange(OtfsRadarError, ValueError):
    """Target delay or Doppler index lies outside the representable span."""


class WindowTooLarge(OtfsRadarError, ValueError):
    """CFAR window does not fit inside the map."""


class InvalidProbability(OtfsRadarError, ValueError):
    """Probability argument outside the open interval (0, 1)."""


class ZeroDenominator(OtfsRadarError, ArithmeticError):
    """Both magnitudes in a two-bin ratio are zero."""


class FractionalTargetUnsupported(OtfsRadarError, ValueError):
    """Operation is only defined for integer-bin targets."""


class SingularFisher(OtfsRadarError, RuntimeError):
    """Fisher information matrix is singular or too ill-conditioned to invert."""


class RetryExhausted(OtfsRadarError, RuntimeError):
    """Rejection sampling failed to produce an admissible draw."""
