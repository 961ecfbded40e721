"""
Epipolar-plane images: 2D slices of a light field with one camera-plane and one
image-plane coordinate varying.
"""

from numbers import Integral
from typing import Optional, Union

import numpy as np
from sklearn.utils._param_validation import StrOptions, validate_params

from sklf.exceptions import OutOfRangeError
from sklf.geometry import Ray
from sklf.models import Camera, LightFieldModel, render_rays
from sklf.scenes import LightFieldDataset


def _check_index(name: str, index: int, size: int) -> None:
    if not 0 <= index < size:
        raise OutOfRangeError(f"{name} must be in [0, {size}), got {index}")


@validate_params(
    {
        "dataset": [LightFieldDataset],
        "camera_index": [Integral],
        "pixel_index": [Integral],
        "axis": [StrOptions({"horizontal", "vertical"})],
    },
    prefer_skip_nested_validation=True,
)
def epi_from_dataset(
    dataset: LightFieldDataset,
    camera_index: int,
    pixel_index: int,
    axis: str = "horizontal",
) -> np.ndarray:
    """
    Epipolar-plane image resampled from dataset views.

    For ``axis="horizontal"`` the camera grid row ``camera_index`` and the image
    row ``pixel_index`` are fixed, and the EPI has one row per camera of that grid
    row (left to right) and one column per image column. ``axis="vertical"``
    fixes a camera column and an image column instead.

    Returns
    -------
    epi : ndarray of shape (grid_cols, width, 3) or (grid_rows, height, 3)
    """
    rows, cols = dataset.grid_rows, dataset.grid_cols
    images = dataset.images.reshape(rows, cols, dataset.height, dataset.width, 3)
    if axis == "horizontal":
        _check_index("camera_index", camera_index, rows)
        _check_index("pixel_index", pixel_index, dataset.height)
        return images[camera_index, :, pixel_index].copy()

    _check_index("camera_index", camera_index, cols)
    _check_index("pixel_index", pixel_index, dataset.width)
    return images[:, camera_index, :, pixel_index].copy()


def _epi_rays(
    dataset: LightFieldDataset,
    camera_index: int,
    pixel_index: int,
    axis: str,
    num_cameras: int,
) -> Ray:
    positions = dataset.positions.reshape(dataset.grid_rows, dataset.grid_cols, 3)
    if axis == "horizontal":
        _check_index("camera_index", camera_index, dataset.grid_rows)
        _check_index("pixel_index", pixel_index, dataset.height)
        line = positions[camera_index]
    else:
        _check_index("camera_index", camera_index, dataset.grid_cols)
        _check_index("pixel_index", pixel_index, dataset.width)
        line = positions[:, camera_index]

    # cameras evenly spaced between the first and last camera of the grid line
    weights = np.linspace(0, 1, num_cameras)[:, np.newaxis]
    centers = (1 - weights) * line[0] + weights * line[-1]

    origins, directions = [], []
    for center in centers:
        camera = Camera(tuple(center), dataset.pixel_depth, dataset.pixel_extent)
        targets = camera.pixel_centers(dataset.width, dataset.height)
        targets = targets.reshape(dataset.height, dataset.width, 3)
        if axis == "horizontal":
            targets = targets[pixel_index]
        else:
            targets = targets[:, pixel_index]
        origins.append(np.broadcast_to(center, targets.shape))
        directions.append(targets - center)
    return Ray(np.concatenate(origins), np.concatenate(directions))


def epi_from_model(
    model: LightFieldModel,
    dataset: LightFieldDataset,
    camera_index: int,
    pixel_index: int,
    axis: str = "horizontal",
    num_cameras: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> np.ndarray:
    """
    Epipolar-plane image rendered by a model, with the camera and image geometry
    of a dataset, so that it can be compared to :func:`epi_from_dataset`.

    Parameters
    ----------
    num_cameras : int, default=None
        Number of cameras along the slice, evenly spaced between the first and
        last camera of the grid line. ``None`` uses the dataset cameras, larger
        values render a densely sampled EPI.
    """
    if axis not in ("horizontal", "vertical"):
        raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")
    if num_cameras is None:
        num_cameras = dataset.grid_cols if axis == "horizontal" else dataset.grid_rows
    if num_cameras < 1:
        raise ValueError(f"num_cameras must be positive, got {num_cameras}")

    rays = _epi_rays(dataset, camera_index, pixel_index, axis, num_cameras)
    colors, _ = render_rays(model, rays, n_jobs=n_jobs)
    return colors.reshape(num_cameras, -1, 3)


def epi_slice(
    source: Union[LightFieldDataset, LightFieldModel],
    camera_index: int,
    pixel_index: int,
    axis: str = "horizontal",
    dataset: Optional[LightFieldDataset] = None,
    num_cameras: Optional[int] = None,
) -> np.ndarray:
    """
    Epipolar-plane image of a dataset or a model.

    Datasets are resampled with :func:`epi_from_dataset`. Models are rendered
    with :func:`epi_from_model`, using the geometry of ``dataset``.

    Parameters
    ----------
    source : LightFieldDataset or LightFieldModel
        Light field to slice.

    camera_index : int
        Fixed camera grid row (horizontal slices) or column (vertical slices).

    pixel_index : int
        Fixed image row (horizontal slices) or column (vertical slices).

    axis : {"horizontal", "vertical"}, default="horizontal"
        Varying coordinates, ``x`` and ``u`` for horizontal slices, ``y`` and
        ``v`` for vertical ones.

    dataset : LightFieldDataset, default=None
        Camera and image geometry, required for models.

    num_cameras : int, default=None
        Camera count of model EPIs, see :func:`epi_from_model`.

    Returns
    -------
    epi : ndarray of shape (n_cameras, n_pixels, 3)
    """
    if isinstance(source, LightFieldDataset):
        return epi_from_dataset(source, camera_index, pixel_index, axis)
    if dataset is None:
        raise ValueError("Model EPIs need a dataset providing the camera geometry")
    return epi_from_model(
        source, dataset, camera_index, pixel_index, axis, num_cameras=num_cameras
    )
