"""Exception types raised across the package."""


class NrspError(Exception):
    """Base class for all package errors."""


class UnsupportedFormat(NrspError):
    pass


class CorruptData(NrspError):
    pass


class ImageTooSmall(NrspError, ValueError):
    pass


class DimensionMismatch(NrspError, ValueError):
    pass


class TooManyClusters(NrspError, ValueError):
    pass


class LengthMismatch(NrspError, ValueError):
    pass


class EmptyLabel(NrspError, ValueError):
    pass


class EmptyMatrix(NrspError, ValueError):
    pass


class EmptyDataset(NrspError):
    pass


class ConfigError(NrspError, ValueError):
    pass
