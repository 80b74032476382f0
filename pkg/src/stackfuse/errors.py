"""Exception hierarchy shared across the package."""


class StackFuseError(Exception):
    """Base class for all stackfuse errors."""


class EmptyStackError(StackFuseError):
    """No frames found where at least one was required."""


class GeometryMismatchError(StackFuseError):
    """Rasters that must share a geometry do not."""


class DecodeError(StackFuseError):
    """A file could not be decoded as a single-channel 8-bit image."""


class BadGeometryError(StackFuseError):
    """Image too small for the requested tiling."""


class BadKernelError(StackFuseError):
    """Kernel size is even or exceeds the image."""


class BadWindowError(StackFuseError):
    """Window sizes are even, or the template exceeds the search window."""


class UnknownProjectionError(StackFuseError):
    """Projection token not recognized."""


class OverlappingFamiliesError(StackFuseError):
    """Operator families share an acronym."""


class TooSmallError(StackFuseError):
    """Image smaller than the minimum an algorithm supports."""


class NoActiveBlocksError(StackFuseError):
    """No spatially active blocks: the block-based score is undefined."""


class ModelMissingError(StackFuseError):
    """A scoring model was required but not provided or not found."""


class CorpusTooSmallError(StackFuseError):
    """Not enough (or too small) images to fit a model."""


class EmptySampleError(StackFuseError):
    """Statistics requested over an empty sample."""


class ConfigError(StackFuseError):
    """Run configuration is malformed."""


class MissingManifestError(StackFuseError):
    """A manifest file was required but not found."""
