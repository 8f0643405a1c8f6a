"""Exception types raised across the simulator."""


class LpiSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(LpiSimError, ValueError):
    """Invalid or unsupported configuration."""


class DimensionError(LpiSimError, ValueError):
    """Array shape does not match the frame configuration."""


class DegenerateReferenceError(LpiSimError, ValueError):
    """Reference symbols too small to divide by."""


class UnsupportedDelayError(LpiSimError, ValueError):
    """Target delay exceeds one OFDM symbol."""


class NoTargetError(LpiSimError):
    """No peak left once the masks are applied."""


class DegenerateMaskError(LpiSimError):
    """Masks leave no bins for the requested statistic."""


class FormatError(LpiSimError):
    """Malformed binary or text record."""


class WeakLosWarning(UserWarning):
    """Line-of-sight bin too weak to serve as a phase reference."""
