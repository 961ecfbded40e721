from typing import Any

import numpy as np

from sklf.exceptions import DimensionMismatchError


def ensure_vectors(X: Any, dim: int, name: str = "X") -> np.ndarray:
    """
    Convert input to a float64 array with trailing dimension ``dim``, e.g. points
    of shape (3,) or (n, 3). Raises ``ValueError`` for other shapes or non-finite
    values.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] != dim:
        raise ValueError(
            f"{name} must have trailing dimension {dim}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return arr


def ensure_image(image: Any, name: str = "image") -> np.ndarray:
    """
    Convert input to a float64 RGB image of shape (height, width, 3). Grayscale
    images of shape (height, width) get a channel dimension added.
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.ndim != 3:
        raise ValueError(
            f"{name} must have shape (height, width) or (height, width, channels), "
            f"got {arr.shape}"
        )
    return arr


def check_same_dimensions(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"Images must have the same dimensions, got {a.shape} and {b.shape}"
        )
