"""
Exceptions and warnings raised by scikit-lightfields.

Errors are grouped under two bases, so that callers (in particular the command
line interface) can tell numerical failures apart from malformed files:

- :class:`NumericalError` - geometry, shape and optimization problems
- :class:`FileFormatError` - unreadable images, manifests and checkpoints

Missing files are reported with built-in ``FileNotFoundError``.
"""


class NumericalError(ValueError):
    """Base class for numerical and geometric errors."""


class FileFormatError(ValueError):
    """Base class for errors in stored images, manifests and checkpoints."""


class ParallelRayError(NumericalError):
    """Ray is parallel to a plane it has to intersect."""


class BehindNearPlaneError(NumericalError):
    """Ray origin shifted to the near plane lies behind the camera."""


class NoIntersectionError(NumericalError):
    """Ray does not intersect the requested voxel."""


class ShapeMismatchError(NumericalError):
    """Array shapes do not chain, e.g. network input width or gradient layout."""


class DegenerateEmbeddingError(NumericalError):
    """Embedding network output has (numerically) zero norm."""


class UnsortedSamplesError(NumericalError):
    """Compositing samples are not sorted by entry distance."""


class NonFiniteLossError(NumericalError):
    """Training loss or gradients became NaN or infinite."""


class EmptyDatasetError(NumericalError):
    """Dataset has no training pixels to sample from."""


class EmptySplitError(NumericalError):
    """Requested dataset split contains no views."""


class DimensionMismatchError(NumericalError):
    """Compared images have different dimensions."""


class ImageTooSmallError(NumericalError):
    """Image is smaller than the metric window."""


class OutOfRangeError(NumericalError, IndexError):
    """Slice or view index outside of the valid range."""


class MalformedHeaderError(FileFormatError):
    """Image file header cannot be parsed."""


class SchemaVersionMismatchError(FileFormatError):
    """Dataset manifest has an unsupported schema version."""


class MissingFieldError(FileFormatError, KeyError):
    """Dataset manifest lacks a required field."""

    def __str__(self) -> str:
        # KeyError quotes its message, ValueError does not
        return str(self.args[0]) if self.args else ""


class CheckpointVersionError(FileFormatError):
    """Checkpoint was written with an unsupported format version."""


class CorruptCheckpointError(FileFormatError):
    """Checkpoint is truncated or fails its checksum."""


class ConstantEmbeddingWarning(UserWarning):
    """Embedding has no variance, principal components are undefined."""
