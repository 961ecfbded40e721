import time
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from sklf.geometry import Ray
from sklf.models.compositing import composite_weights
from sklf.models.lightfield import LightFieldModel
from sklf.models.pipeline import (
    evaluate_samples,
    forward_rays,
    pad_samples,
    trace_rays,
)
from sklf.utils import run_in_parallel

DEFAULT_CHUNK_SIZE = 4096


@dataclass(frozen=True)
class Camera:
    """
    Pinhole camera of a forward-facing light field capture.

    All cameras of a capture look at the same window on the pixel plane, i.e.
    image pixels are centers of a regular grid spanning ``[-extent, extent]^2``
    on the plane ``z = target_depth``, with row 0 at the top (largest y).

    Parameters
    ----------
    position : tuple of 3 floats
        Camera center, in scene units.

    target_depth : float, default=0.0
        Depth of the pixel plane.

    extent : float, default=1.0
        Half-size of the pixel window.
    """

    position: tuple = (0.0, 0.0, -1.0)
    target_depth: float = 0.0
    extent: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        if len(self.position) != 3:
            raise ValueError(f"Camera position must be a 3-vector, got {self.position}")
        if self.extent <= 0:
            raise ValueError(f"Camera extent must be positive, got {self.extent}")
        if self.position[2] == self.target_depth:
            raise ValueError("Camera must not lie on its pixel plane")

    def pixel_centers(self, width: int, height: int) -> np.ndarray:
        """Pixel centers on the pixel plane, shape (height * width, 3), row-major."""
        if width < 1 or height < 1:
            raise ValueError(f"Image size must be positive, got {width}x{height}")
        xs = -self.extent + (np.arange(width) + 0.5) * (2 * self.extent / width)
        ys = self.extent - (np.arange(height) + 0.5) * (2 * self.extent / height)
        grid_x, grid_y = np.meshgrid(xs, ys)
        depth = np.full(grid_x.size, float(self.target_depth))
        return np.stack([grid_x.ravel(), grid_y.ravel(), depth], axis=1)

    def rays(self, width: int, height: int) -> Ray:
        """Rays through all pixel centers, row-major."""
        targets = self.pixel_centers(width, height)
        origin = np.broadcast_to(np.array(self.position), targets.shape)
        return Ray(origin, targets - origin)


class RenderResult(NamedTuple):
    """Rendered image with total color network evaluations and wall time (s)."""

    image: np.ndarray
    evaluations: int
    wall_time: float


def _render_chunk(model: LightFieldModel, ray: Ray) -> tuple[np.ndarray, np.ndarray]:
    colors, batch, _, _ = forward_rays(model, ray)
    return colors.astype(np.float64), batch.counts


def render_rays(
    model: LightFieldModel,
    ray: Ray,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    n_jobs: Optional[int] = None,
    verbose: Union[int, dict] = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Render a bundle of rays.

    Rays are processed in chunks of ``chunk_size``, in parallel when
    ``n_jobs`` allows it. Chunking does not change the results.

    Parameters
    ----------
    model : LightFieldModel
        Model to render.

    ray : Ray
        Rays to render.

    chunk_size : int, default=4096
        Number of rays evaluated together.

    n_jobs : int, default=None
        The number of jobs to run in parallel. ``None`` means 1 unless in a
        :obj:`joblib.parallel_backend` context. ``-1`` means using all processors.

    verbose : int or dict, default=0
        Controls the verbosity of the progress bar over chunks.

    Returns
    -------
    colors : ndarray of shape (n_rays, 3)
        Colors in ``[0, 1]``.

    evals : ndarray of shape (n_rays,)
        Color network evaluations per ray: 1 without a grid, the number of
        crossed voxels with one.
    """
    origins = np.atleast_2d(ray.origin)
    directions = np.atleast_2d(ray.direction)
    n_rays = len(origins)
    if n_rays == 0:
        return np.zeros((0, 3)), np.zeros(0, dtype=np.int64)

    starts = np.arange(0, n_rays, chunk_size)

    def render_starts(chunk_starts: np.ndarray) -> list:
        return [
            _render_chunk(
                model,
                Ray(origins[s : s + chunk_size], directions[s : s + chunk_size]),
            )
            for s in chunk_starts
        ]

    results = run_in_parallel(
        render_starts,
        data=starts,
        n_jobs=n_jobs,
        batch_size=1,
        flatten_results=True,
        verbose=verbose,
        prefer="threads",
    )
    colors = np.concatenate([colors for colors, _ in results])
    evals = np.concatenate([evals for _, evals in results])
    return colors, evals


def render_ray(model: LightFieldModel, ray: Ray) -> np.ndarray:
    """
    Color of a single ray.

    Without a grid the ray is parameterized by its two-plane coordinates and the
    networks are evaluated once. With a grid, it is localized in every voxel it
    crosses, the samples are evaluated in one batch and over-composited. Rays
    missing the grid get the background color.
    """
    colors, _ = render_rays(model, ray)
    return colors[0]


def render_image(
    model: LightFieldModel,
    camera: Camera,
    width: int,
    height: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    n_jobs: Optional[int] = None,
    verbose: Union[int, dict] = 0,
) -> RenderResult:
    """
    Render an image of ``height x width`` pixels seen by ``camera``.

    Rendering is deterministic: the same model and camera give bitwise identical
    images, regardless of ``n_jobs``.

    Returns
    -------
    result : RenderResult
        Image of shape (height, width, 3), total color network evaluations and
        wall time in seconds.

    Examples
    --------
    >>> from sklf.models import Camera, build_model, render_image
    >>> model = build_model("none", width=16, depth=2, skip_layer=None)
    >>> result = render_image(model, Camera(), width=2, height=2)
    >>> result.evaluations
    4
    """
    start = time.perf_counter()
    colors, evals = render_rays(
        model,
        camera.rays(width, height),
        chunk_size=chunk_size,
        n_jobs=n_jobs,
        verbose=verbose,
    )
    wall_time = time.perf_counter() - start
    return RenderResult(
        colors.reshape(height, width, 3), int(evals.sum()), wall_time
    )


def embed_rays(
    model: LightFieldModel, ray: Ray, chunk_size: int = DEFAULT_CHUNK_SIZE
) -> np.ndarray:
    """
    Latent vectors of rays, as fed to the color network before encoding.

    Subdivided models give the latent of the sample with the largest compositing
    weight of each ray, and zeros for rays missing the grid.

    Returns
    -------
    latents : ndarray of shape (n_rays, N)
    """
    if model.embedding_kind.kind == "none":
        raise ValueError("Model has no embedding network")

    origins = np.atleast_2d(ray.origin)
    directions = np.atleast_2d(ray.direction)
    parts = []
    for s in range(0, len(origins), chunk_size):
        chunk = Ray(origins[s : s + chunk_size], directions[s : s + chunk_size])
        batch = trace_rays(model, chunk)
        _, alpha, cache = evaluate_samples(model, batch.coords, batch.voxel_indices)
        if not model.subdivided:
            parts.append(cache.latent.astype(np.float64))
            continue

        latents = np.zeros((batch.n_rays, model.embedding_kind.latent_dim))
        if len(batch.ray_index):
            _, alphas = pad_samples(batch, cache.rgb, alpha)
            weights, _ = composite_weights(alphas)
            best = np.argmax(weights, axis=1)
            sample_of = np.full((batch.n_rays, batch.n_slots), -1)
            sample_of[batch.ray_index, batch.slot] = np.arange(len(batch.ray_index))
            hit = batch.counts > 0
            rows = np.nonzero(hit)[0]
            latents[rows] = cache.latent[sample_of[rows, best[rows]]]
        parts.append(latents)

    if not parts:
        return np.zeros((0, model.embedding_kind.latent_dim))
    return np.concatenate(parts)
