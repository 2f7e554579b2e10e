"""Exception types shared across the package."""


class GridMismatchError(ValueError):
    """Wavelength grid cannot be constructed from the given span/spacing."""


class CapacityError(ValueError):
    """More channels requested than the grid can hold."""


class SearchTooLargeError(RuntimeError):
    """Exhaustive search refused: case count above the configured cap."""


class SpectrumError(ValueError):
    """Malformed Raman cross-section table."""


class ParameterOrderError(ValueError):
    """Decoy intensities violate mu > nu (or are too close to separate)."""


class UndefinedGainError(ValueError):
    """Rate gain requested against a zero reference rate."""


class InfeasibleError(RuntimeError):
    """No operating point with positive key rates in the probed range."""


class ConfigError(ValueError):
    """Configuration rejected; message carries the offending field path."""
