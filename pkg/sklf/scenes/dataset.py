"""
Forward-facing light field datasets captured by a regular grid of cameras.
"""

import dataclasses
import json
import os
from dataclasses import dataclass
from numbers import Integral, Real
from pathlib import Path
from typing import Optional, Union

import numpy as np
from sklearn.utils._param_validation import Interval, validate_params

from sklf.exceptions import (
    FileFormatError,
    MissingFieldError,
    OutOfRangeError,
    SchemaVersionMismatchError,
)
from sklf.geometry import Ray, TwoPlaneParam, to_two_plane
from sklf.models import Camera
from sklf.scenes.analytic import AnalyticScene, analytic_lightfield
from sklf.scenes.image_io import quantize, read_image, write_image
from sklf.utils import run_in_parallel

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class HoldoutRule:
    """
    Rule splitting the views of a camera grid into training and holdout views.

    Parameters
    ----------
    kind : {"every_kth", "grid_stride", "none"}, default="every_kth"
        - ``"every_kth"`` holds out views with flat index ``i % k == k - 1``
        - ``"grid_stride"`` trains on views whose row and column are both
          divisible by ``k`` and holds out all others
        - ``"none"`` uses all views for training

    k : int, default=8
        Period or stride of the rule.

    Examples
    --------
    >>> from sklf.scenes import HoldoutRule
    >>> HoldoutRule("every_kth", k=2).holdout_mask(3, 3).nonzero()[0]
    array([1, 3, 5, 7])
    """

    kind: str = "every_kth"
    k: int = 8

    def __post_init__(self):
        if self.kind not in ("every_kth", "grid_stride", "none"):
            raise ValueError(f"Unknown holdout rule {self.kind!r}")
        if self.k < 1:
            raise ValueError(f"Holdout period k must be positive, got {self.k}")

    def holdout_mask(self, rows: int, cols: int) -> np.ndarray:
        """Boolean mask over row-major views, True for held out views."""
        index = np.arange(rows * cols)
        if self.kind == "every_kth":
            return index % self.k == self.k - 1
        if self.kind == "grid_stride":
            row, col = np.divmod(index, cols)
            return ~((row % self.k == 0) & (col % self.k == 0))
        return np.zeros(rows * cols, dtype=bool)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k}


@dataclass(frozen=True, eq=False)
class LightFieldDataset:
    """
    Images of a forward-facing scene taken by a grid of cameras.

    Cameras lie on the plane ``pi^xy`` of ``param`` and all look at the same
    window ``[-pixel_extent, pixel_extent]^2`` on the plane ``z = pixel_depth``,
    so every pixel corresponds to a unique ray from its camera center through
    its pixel center.

    Parameters
    ----------
    images : ndarray of shape (n_views, height, width, 3)
        Pixel colors in [0, 1], views in row-major camera grid order.

    positions : ndarray of shape (n_views, 3)
        Camera centers.

    param : TwoPlaneParam
        Parameterization of the rays.

    grid_rows, grid_cols : int
        Shape of the camera grid.

    holdout : ndarray of shape (n_views,)
        Boolean mask of held out views, the remaining ones are used for training.

    holdout_rule : HoldoutRule or None
        Rule the split was created with, if any.

    camera_extent : float, default=0.25
        Half-size of the camera grid on ``pi^xy``.

    pixel_extent : float, default=1.0
        Half-size of the pixel window.

    pixel_depth : float, default=0.0
        Depth of the pixel window.

    scene : AnalyticScene, default=None
        Scene the images were generated from, if known.
    """

    images: np.ndarray
    positions: np.ndarray
    param: TwoPlaneParam
    grid_rows: int
    grid_cols: int
    holdout: np.ndarray
    holdout_rule: Optional[HoldoutRule] = None
    camera_extent: float = 0.25
    pixel_extent: float = 1.0
    pixel_depth: float = 0.0
    scene: Optional[AnalyticScene] = None

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        positions = np.asarray(self.positions, dtype=np.float64)
        holdout = np.asarray(self.holdout, dtype=bool)
        if images.ndim != 4 or images.shape[3] != 3:
            raise ValueError(
                f"images must have shape (n_views, height, width, 3), "
                f"got {images.shape}"
            )
        n_views = len(images)
        if n_views != self.grid_rows * self.grid_cols:
            raise ValueError(
                f"Got {n_views} images for a {self.grid_rows}x{self.grid_cols} "
                f"camera grid"
            )
        if positions.shape != (n_views, 3):
            raise ValueError(
                f"positions must have shape ({n_views}, 3), got {positions.shape}"
            )
        if holdout.shape != (n_views,):
            raise ValueError(
                f"holdout mask must have shape ({n_views},), got {holdout.shape}"
            )
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "holdout", holdout)

    @property
    def num_views(self) -> int:
        return len(self.images)

    @property
    def height(self) -> int:
        return self.images.shape[1]

    @property
    def width(self) -> int:
        return self.images.shape[2]

    @property
    def train_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.holdout)

    @property
    def holdout_indices(self) -> np.ndarray:
        return np.flatnonzero(self.holdout)

    def split_indices(self, split: str) -> np.ndarray:
        """View indices of ``"train"``, ``"holdout"`` or ``"all"`` views."""
        if split == "train":
            return self.train_indices
        if split == "holdout":
            return self.holdout_indices
        if split == "all":
            return np.arange(self.num_views)
        raise ValueError(f"Unknown split {split!r}")

    def camera(self, view: int) -> Camera:
        if not 0 <= view < self.num_views:
            raise OutOfRangeError(
                f"View index must be in [0, {self.num_views}), got {view}"
            )
        return Camera(
            position=tuple(self.positions[view]),
            target_depth=self.pixel_depth,
            extent=self.pixel_extent,
        )

    def view_rays(self, view: int) -> Ray:
        """Rays of all pixels of a view, row-major."""
        return self.camera(view).rays(self.width, self.height)

    def pixels(self, split: str = "train") -> tuple[Ray, np.ndarray]:
        """
        Rays and colors of all pixels of a split.

        Returns
        -------
        rays : Ray
            Bundle of ``n_views * height * width`` rays, view by view.

        colors : ndarray of shape (n_rays, 3)
        """
        views = self.split_indices(split)
        if len(views) == 0:
            return Ray(np.zeros((0, 3)), np.zeros((0, 3))), np.zeros((0, 3))
        rays = [self.view_rays(view) for view in views]
        origins = np.concatenate([np.atleast_2d(r.origin) for r in rays])
        directions = np.concatenate([np.atleast_2d(r.direction) for r in rays])
        colors = self.images[views].reshape(-1, 3)
        return Ray(origins, directions), colors

    def ray_coords(self, view: int) -> np.ndarray:
        """Two-plane coordinates of all pixels of a view, shape (height * width, 4)."""
        return to_two_plane(self.view_rays(view), self.param)

    def metadata(self) -> dict:
        """Everything but the images, as stored in manifests."""
        return {
            "param": {"z_xy": self.param.z_xy, "z_uv": self.param.z_uv},
            "grid": {
                "rows": self.grid_rows,
                "cols": self.grid_cols,
                "camera_extent": self.camera_extent,
            },
            "image": {
                "width": self.width,
                "height": self.height,
                "pixel_depth": self.pixel_depth,
                "pixel_extent": self.pixel_extent,
            },
            "cameras": self.positions.tolist(),
            "split": {
                "rule": self.holdout_rule.to_dict() if self.holdout_rule else None,
                "holdout": self.holdout_indices.tolist(),
            },
            "scene": self.scene.to_dict() if self.scene is not None else None,
        }


def camera_grid(rows: int, cols: int, extent: float, depth: float) -> np.ndarray:
    """
    Row-major camera centers of a regular grid spanning ``[-extent, extent]^2``
    on the plane ``z = depth``, row 0 at the top. Single rows or columns are
    centered.
    """
    xs = np.linspace(-extent, extent, cols) if cols > 1 else np.zeros(1)
    ys = np.linspace(extent, -extent, rows) if rows > 1 else np.zeros(1)
    grid_x, grid_y = np.meshgrid(xs, ys)
    depths = np.full(grid_x.size, float(depth))
    return np.stack([grid_x.ravel(), grid_y.ravel(), depths], axis=1)


@validate_params(
    {
        "scene": [AnalyticScene],
        "grid_rows": [Interval(Integral, 1, None, closed="left")],
        "grid_cols": [Interval(Integral, 1, None, closed="left")],
        "image_w": [Interval(Integral, 1, None, closed="left")],
        "image_h": [Interval(Integral, 1, None, closed="left")],
        "param": [TwoPlaneParam, None],
        "holdout_rule": [HoldoutRule, None],
        "camera_extent": [Interval(Real, 0, None, closed="left")],
        "pixel_extent": [Interval(Real, 0, None, closed="neither")],
        "pixel_depth": [Real],
        "quantized": ["boolean"],
        "n_jobs": [Integral, None],
        "verbose": ["verbose", dict],
    },
    prefer_skip_nested_validation=True,
)
def generate_grid_dataset(
    scene: AnalyticScene,
    grid_rows: int = 5,
    grid_cols: int = 5,
    image_w: int = 64,
    image_h: int = 64,
    param: Optional[TwoPlaneParam] = None,
    holdout_rule: Optional[HoldoutRule] = None,
    camera_extent: float = 0.25,
    pixel_extent: float = 1.0,
    pixel_depth: float = 0.0,
    quantized: bool = True,
    n_jobs: Optional[int] = None,
    verbose: Union[int, dict] = 0,
) -> LightFieldDataset:
    """
    Render a light field dataset of an analytic scene.

    Cameras are placed on a regular grid on the plane ``pi^xy``, and every pixel
    color is the exact color of its ray, given by :func:`analytic_lightfield`.

    Parameters
    ----------
    scene : AnalyticScene
        Scene to capture.

    grid_rows, grid_cols : int, default=5
        Shape of the camera grid.

    image_w, image_h : int, default=64
        Image size in pixels.

    param : TwoPlaneParam, default=None
        Ray parameterization. ``None`` uses ``TwoPlaneParam(z_xy=-1, z_uv=0)``.

    holdout_rule : HoldoutRule, default=None
        Train/holdout split. ``None`` holds out every 8th view.

    camera_extent : float, default=0.25
        Half-size of the camera grid.

    pixel_extent : float, default=1.0
        Half-size of the pixel window on the plane ``z = pixel_depth``.

    pixel_depth : float, default=0.0
        Depth of the pixel window.

    quantized : bool, default=True
        Whether to quantize colors to 8 bits, as stored on disk.

    n_jobs : int, default=None
        The number of jobs to run in parallel over views. ``None`` means 1 unless
        in a :obj:`joblib.parallel_backend` context. ``-1`` means using all
        processors.

    verbose : int or dict, default=0
        Controls the verbosity when rendering views.

    Returns
    -------
    dataset : LightFieldDataset

    Examples
    --------
    >>> from sklf.scenes import AnalyticScene, Rectangle, generate_grid_dataset
    >>> scene = AnalyticScene([Rectangle(depth=0.0)])
    >>> dataset = generate_grid_dataset(scene, 1, 1, image_w=4, image_h=4)
    >>> dataset.images.shape
    (1, 4, 4, 3)
    """
    param = param if param is not None else TwoPlaneParam()
    holdout_rule = holdout_rule if holdout_rule is not None else HoldoutRule()
    scene.check_depths(param)

    positions = camera_grid(grid_rows, grid_cols, camera_extent, param.z_xy)

    def render_views(views: np.ndarray) -> list[np.ndarray]:
        images = []
        for view in views:
            camera = Camera(tuple(positions[view]), pixel_depth, pixel_extent)
            coords = to_two_plane(camera.rays(image_w, image_h), param)
            colors = analytic_lightfield(scene, coords, param)
            images.append(colors.reshape(image_h, image_w, 3))
        return images

    images = run_in_parallel(
        render_views,
        data=np.arange(len(positions)),
        n_jobs=n_jobs,
        flatten_results=True,
        verbose=verbose,
    )
    images = np.stack(images)
    if quantized:
        images = quantize(images) / 255

    return LightFieldDataset(
        images=images,
        positions=positions,
        param=param,
        grid_rows=grid_rows,
        grid_cols=grid_cols,
        holdout=holdout_rule.holdout_mask(grid_rows, grid_cols),
        holdout_rule=holdout_rule,
        camera_extent=camera_extent,
        pixel_extent=pixel_extent,
        pixel_depth=pixel_depth,
        scene=scene,
    )


def reparameterize_dataset(
    dataset: LightFieldDataset, new_z_uv: float
) -> LightFieldDataset:
    """
    Move the plane ``pi^uv`` of a dataset to depth ``new_z_uv``.

    Rays and colors are unchanged, only their coordinates ``(u, v)`` change to
    ``u' = x + (u - x) * (new_z_uv - z_xy) / (z_uv - z_xy)``.

    Raises ``ParallelRayError`` if a stored ray is parallel to the planes.
    """
    param = TwoPlaneParam(z_xy=dataset.param.z_xy, z_uv=float(new_z_uv))
    for view in range(dataset.num_views):
        to_two_plane(dataset.view_rays(view), param)
    return dataclasses.replace(dataset, param=param)


def image_file_name(view: int) -> str:
    return f"view_{view:03d}.png"


def write_manifest(
    path: Union[str, os.PathLike],
    dataset: LightFieldDataset,
    image_files: Optional[list[str]] = None,
) -> None:
    """
    Write the dataset manifest: a JSON file with ``schema_version``, the
    parameterization, camera grid, image window, camera positions, split, scene
    description and image file names relative to the manifest directory.
    """
    if image_files is None:
        image_files = [image_file_name(view) for view in range(dataset.num_views)]
    if len(image_files) != dataset.num_views:
        raise ValueError(
            f"Got {len(image_files)} image files for {dataset.num_views} views"
        )
    manifest = {"schema_version": SCHEMA_VERSION, **dataset.metadata()}
    manifest["images"] = list(image_files)
    with open(path, "w") as file:
        json.dump(manifest, file, indent=2, sort_keys=True)
        file.write("\n")


def _field(data: dict, key: str, context: str = "manifest"):
    if not isinstance(data, dict) or key not in data:
        raise MissingFieldError(f"Field {key!r} missing in {context}")
    return data[key]


def read_manifest(path: Union[str, os.PathLike]) -> LightFieldDataset:
    """
    Read a dataset manifest and the images it references.

    Only ``schema_version``, ``param`` and ``images`` are required. A missing
    camera grid means a single camera at the origin of ``pi^xy``, a missing split
    means all views are training views, and the image window defaults to
    ``[-1, 1]^2`` at depth 0.
    """
    path = Path(path)
    with open(path) as file:
        try:
            manifest = json.load(file)
        except json.JSONDecodeError as err:
            raise FileFormatError(f"Manifest {path} is not valid JSON: {err}") from err
    if not isinstance(manifest, dict):
        raise FileFormatError(f"Manifest {path} must contain a JSON object")

    try:
        return _dataset_from_manifest(manifest, path)
    except FileFormatError:
        raise
    except (KeyError, TypeError, AttributeError) as err:
        raise FileFormatError(f"Manifest {path} is malformed: {err!r}") from err


def _dataset_from_manifest(manifest: dict, path: Path) -> LightFieldDataset:
    version = _field(manifest, "schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"Manifest schema version {version} is not supported, "
            f"expected {SCHEMA_VERSION}"
        )

    param_data = _field(manifest, "param")
    param = TwoPlaneParam(
        z_xy=float(_field(param_data, "z_xy", "param")),
        z_uv=float(_field(param_data, "z_uv", "param")),
    )
    image_files = _field(manifest, "images")
    images = np.stack([read_image(path.parent / name) for name in image_files])

    grid = manifest.get("grid") or {}
    rows = int(grid.get("rows", 1))
    cols = int(grid.get("cols", len(images) // rows))
    if "cameras" in manifest:
        positions = np.array(manifest["cameras"], dtype=np.float64)
    elif len(images) == 1:
        positions = np.array([[0.0, 0.0, param.z_xy]])
    else:
        raise MissingFieldError(
            f"Field 'cameras' missing in manifest with {len(images)} images"
        )

    window = manifest.get("image") or {}
    for key, size in (("height", images.shape[1]), ("width", images.shape[2])):
        if key in window and window[key] != size:
            raise FileFormatError(
                f"Manifest declares image {key} {window[key]}, files have {size}"
            )

    split = manifest.get("split") or {}
    holdout = np.zeros(len(images), dtype=bool)
    holdout_views = np.asarray(split.get("holdout", []), dtype=int)
    if len(holdout_views) and not (
        holdout_views.min() >= 0 and holdout_views.max() < len(images)
    ):
        raise FileFormatError(f"Holdout views {holdout_views} out of range")
    holdout[holdout_views] = True
    rule = HoldoutRule(**split["rule"]) if split.get("rule") else None

    scene = manifest.get("scene")
    return LightFieldDataset(
        images=images,
        positions=positions,
        param=param,
        grid_rows=rows,
        grid_cols=cols,
        holdout=holdout,
        holdout_rule=rule,
        camera_extent=float(grid.get("camera_extent", 0.0)),
        pixel_extent=float(window.get("pixel_extent", 1.0)),
        pixel_depth=float(window.get("pixel_depth", 0.0)),
        scene=AnalyticScene.from_dict(scene) if scene else None,
    )


def save_dataset(
    dataset: LightFieldDataset, directory: Union[str, os.PathLike]
) -> list[Path]:
    """
    Save a dataset as a directory with ``manifest.json`` and one PNG per view.

    Returns
    -------
    paths : list of Path
        Written files, manifest last.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for view in range(dataset.num_views):
        image_path = directory / image_file_name(view)
        write_image(image_path, dataset.images[view])
        paths.append(image_path)

    manifest_path = directory / MANIFEST_NAME
    write_manifest(manifest_path, dataset)
    paths.append(manifest_path)
    return paths


def load_dataset(directory: Union[str, os.PathLike]) -> LightFieldDataset:
    """Load a dataset saved with :func:`save_dataset`."""
    directory = Path(directory)
    if directory.is_file():
        return read_manifest(directory)
    return read_manifest(directory / MANIFEST_NAME)
