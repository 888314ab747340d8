"""Exception types raised by the rawboost library."""


class RawboostError(Exception):
    """Base class for all library errors."""


class ConfigurationError(RawboostError):
    """A parameter range or configuration value is invalid."""


class ChainParseError(RawboostError):
    """A chain string could not be parsed."""


class DegenerateSpecError(RawboostError):
    """A notch specification leaves no usable stop band inside (0, fs/2)."""


class DegenerateInputError(RawboostError):
    """An input signal violates a kernel precondition (e.g. zero energy)."""


class DegenerateFilterError(RawboostError):
    """A coloring filter produced zero-energy noise."""


class UnsupportedFormatError(RawboostError):
    """An audio file is not RIFF/WAVE PCM 16-bit mono."""


class ReplayError(RawboostError):
    """A provenance record could not be replayed consistently."""
