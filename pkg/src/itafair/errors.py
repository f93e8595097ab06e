"""Exception types shared across the toolkit."""


class ItafairError(Exception):
    """Base class for all toolkit-specific errors."""


class DegenerateAngleError(ItafairError):
    """Typology angle undefined: arctan variant with zero chroma denominator."""


class DegenerateHistogramError(ItafairError):
    """Histogram has fewer than two populated grey levels; no split exists."""


class DecodeError(ItafairError):
    """Image file exists but cannot be decoded as 8-bit RGB."""


class InvalidSideError(ItafairError, ValueError):
    """Requested standardization side too small to host the periphery patches."""


class InvalidKernelError(ItafairError, ValueError):
    """Morphology kernel must be odd and at least 3 pixels wide."""


class ZeroChannelError(ItafairError):
    """A colour channel averages to zero; white-balance gains are undefined."""


class OutOfGamutError(ItafairError):
    """CIELab colour has no sRGB representation."""


class EmptyInputError(ItafairError):
    """Metric computation requires at least one record."""


class NoOverlapError(ItafairError):
    """Join between predictions and tone assignments is empty."""


class MissingMaskDirError(ItafairError):
    """Healthy-skin mask directory is required for mask-driven estimation."""


class InvalidRatiosError(ItafairError, ValueError):
    """Split ratios must be positive and sum to one."""


class EmptyTrainSetError(ItafairError):
    """No records fall on the training side of the tone cutoff."""


class EmptyTestSetError(ItafairError):
    """No records fall on the test side of the tone cutoff."""
