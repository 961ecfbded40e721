from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit, prange

from sklf.exceptions import NoIntersectionError, OutOfRangeError, ParallelRayError
from sklf.geometry.rays import PARALLEL_EPS, Ray, RayCoords4D

# segments shorter than this (grazing hits of edges and corners) are dropped
SEGMENT_EPS = 1e-10


@dataclass(frozen=True)
class VoxelGrid:
    """
    Regular subdivision of an axis-aligned box into ``resolution ** 3`` voxels.

    Voxels are indexed with a flat index ``i = (ix * N + iy) * N + iz``, where
    ``N`` is the resolution and ``(ix, iy, iz)`` are integer cell coordinates.

    Parameters
    ----------
    resolution : int
        Number of voxels along each axis. Must be positive.

    box_min : tuple of 3 floats
        Lower corner of the box, in scene units.

    box_max : tuple of 3 floats
        Upper corner of the box, in scene units. Must be larger than ``box_min``
        in every coordinate.

    Examples
    --------
    >>> from sklf.geometry import VoxelGrid
    >>> grid = VoxelGrid(2, box_min=(-1, -1, -1), box_max=(1, 1, 1))
    >>> grid.num_voxels
    8
    >>> grid.voxel_width
    array([1., 1., 1.])
    """

    resolution: int
    box_min: tuple = (-1.0, -1.0, -1.0)
    box_max: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 1:
            raise ValueError(
                f"Grid resolution must be a positive integer, got {self.resolution}"
            )
        box_min = tuple(float(x) for x in self.box_min)
        box_max = tuple(float(x) for x in self.box_max)
        if len(box_min) != 3 or len(box_max) != 3:
            raise ValueError("Grid box corners must be 3-vectors")
        if not all(lo < hi for lo, hi in zip(box_min, box_max)):
            raise ValueError(
                f"box_min must be smaller than box_max componentwise, "
                f"got {box_min} and {box_max}"
            )
        object.__setattr__(self, "resolution", int(self.resolution))
        object.__setattr__(self, "box_min", box_min)
        object.__setattr__(self, "box_max", box_max)

    @property
    def num_voxels(self) -> int:
        return self.resolution**3

    @property
    def max_hits(self) -> int:
        """Upper bound on voxels crossed by a single ray, ``3N - 2``."""
        return 3 * self.resolution - 2

    @property
    def voxel_width(self) -> np.ndarray:
        return (np.array(self.box_max) - np.array(self.box_min)) / self.resolution

    @property
    def half_width(self) -> np.ndarray:
        return self.voxel_width / 2

    def cell_coords(self, voxel_index) -> np.ndarray:
        """Integer cell coordinates (ix, iy, iz) of flat voxel indices."""
        voxel_index = np.asarray(voxel_index)
        if np.any((voxel_index < 0) | (voxel_index >= self.num_voxels)):
            raise OutOfRangeError(
                f"Voxel index must be in [0, {self.num_voxels}), got {voxel_index}"
            )
        n = self.resolution
        return np.stack(np.unravel_index(voxel_index, (n, n, n)), axis=-1)

    def voxel_centers(self, voxel_index=None) -> np.ndarray:
        """Centers of the given voxels, or of all voxels in flat index order."""
        if voxel_index is None:
            voxel_index = np.arange(self.num_voxels)
        cells = self.cell_coords(voxel_index)
        return np.array(self.box_min) + (cells + 0.5) * self.voxel_width

    def normalized_centers(self, voxel_index=None) -> np.ndarray:
        """Voxel centers with the grid box mapped to ``[-1, 1]^3``."""
        centers = self.voxel_centers(voxel_index)
        box_min, box_max = np.array(self.box_min), np.array(self.box_max)
        return 2 * (centers - box_min) / (box_max - box_min) - 1

    def to_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "box_min": list(self.box_min),
            "box_max": list(self.box_max),
        }


class LocalRayCoords(NamedTuple):
    """
    Ray re-parameterized in the frame of a single voxel.

    ``coords`` holds the (x, y) intersection with the voxel's front (lower z) face
    and the (u, v) intersection with its back face, relative to the voxel center.
    ``entry_t`` and ``exit_t`` delimit the segment of the ray inside the voxel.
    """

    voxel_index: int
    coords: RayCoords4D
    entry_t: float
    exit_t: float


class VoxelTraversal(NamedTuple):
    """
    Voxels crossed by a bundle of rays, padded to ``grid.max_hits`` per ray.

    For ray ``r`` only the first ``counts[r]`` entries of each row are valid; they
    are ordered by ascending ``entry_t``. Padding uses index -1.
    """

    voxel_indices: np.ndarray
    entry_t: np.ndarray
    exit_t: np.ndarray
    counts: np.ndarray


@njit(parallel=True)
def _traverse_kernel(
    origins: np.ndarray,
    directions: np.ndarray,
    box_min: np.ndarray,
    width: np.ndarray,
    resolution: int,
    t_min: float,
    out_idx: np.ndarray,
    out_t0: np.ndarray,
    out_t1: np.ndarray,
    out_count: np.ndarray,
) -> None:
    max_hits = out_idx.shape[1]
    for r in prange(origins.shape[0]):
        o = origins[r]
        d = directions[r]

        # slab test against the whole box, planes k = 0 and k = N
        t_enter = t_min
        t_exit = np.inf
        for a in range(3):
            lo = box_min[a]
            hi = box_min[a] + resolution * width[a]
            if d[a] == 0.0:
                if o[a] < lo or o[a] > hi:
                    t_exit = -np.inf
            else:
                ta = (lo - o[a]) / d[a]
                tb = (hi - o[a]) / d[a]
                if ta > tb:
                    ta, tb = tb, ta
                t_enter = max(t_enter, ta)
                t_exit = min(t_exit, tb)

        count = 0
        if t_exit - t_enter > SEGMENT_EPS:
            cell = np.empty(3, dtype=np.int64)
            t_inside = t_enter + 1e-7 * (t_exit - t_enter)
            for a in range(3):
                c = int(np.floor((o[a] + d[a] * t_inside - box_min[a]) / width[a]))
                cell[a] = min(max(c, 0), resolution - 1)

            t_cur = t_enter
            while count < max_hits:
                t_next = t_exit
                axis = -1
                for a in range(3):
                    if d[a] > 0.0:
                        plane = box_min[a] + (cell[a] + 1) * width[a]
                    elif d[a] < 0.0:
                        plane = box_min[a] + cell[a] * width[a]
                    else:
                        continue
                    t_a = (plane - o[a]) / d[a]
                    if t_a < t_next:
                        t_next = t_a
                        axis = a

                if t_next - t_cur > SEGMENT_EPS:
                    out_idx[r, count] = (
                        cell[0] * resolution + cell[1]
                    ) * resolution + cell[2]
                    out_t0[r, count] = t_cur
                    out_t1[r, count] = t_next
                    count += 1

                if axis < 0:
                    break
                t_cur = max(t_cur, t_next)
                cell[axis] += 1 if d[axis] > 0.0 else -1
                if cell[axis] < 0 or cell[axis] >= resolution:
                    break

        out_count[r] = count


def traverse_voxels(grid: VoxelGrid, ray: Ray, t_min: float = 0.0) -> VoxelTraversal:
    """
    Voxels crossed by each ray of a bundle, in near-to-far order.

    Incremental grid stepping (3D DDA): starting from the voxel where the ray
    enters the box, it repeatedly steps into the neighbor across the nearest
    voxel boundary. Cost is linear in the grid resolution per ray. Only the part
    of the ray with parameter ``t >= t_min`` is considered, and segments of zero
    length (rays grazing an edge or a corner) are excluded.

    The kernel is compiled with Numba, so the first call is slower.

    Parameters
    ----------
    grid : VoxelGrid
        Voxel grid.

    ray : Ray
        Single ray or bundle of rays.

    t_min : float, default=0.0
        Smallest ray parameter considered.

    Returns
    -------
    traversal : VoxelTraversal
        Padded arrays of shape (n_rays, 3N - 2) with voxel indices, entry and exit
        ray parameters, and the number of valid entries per ray.
    """
    origins = np.ascontiguousarray(np.atleast_2d(ray.origin), dtype=np.float64)
    directions = np.ascontiguousarray(np.atleast_2d(ray.direction), dtype=np.float64)
    n_rays = origins.shape[0]

    out_idx = np.full((n_rays, grid.max_hits), -1, dtype=np.int64)
    out_t0 = np.zeros((n_rays, grid.max_hits), dtype=np.float64)
    out_t1 = np.zeros((n_rays, grid.max_hits), dtype=np.float64)
    out_count = np.zeros(n_rays, dtype=np.int64)

    _traverse_kernel(
        origins,
        directions,
        np.array(grid.box_min, dtype=np.float64),
        grid.voxel_width.astype(np.float64),
        grid.resolution,
        float(t_min),
        out_idx,
        out_t0,
        out_t1,
        out_count,
    )
    return VoxelTraversal(out_idx, out_t0, out_t1, out_count)


def voxels_intersected(
    grid: VoxelGrid, ray: Ray, t_min: float = 0.0
) -> list[tuple[int, float, float]]:
    """
    Voxels crossed by a single ray, as ``(voxel_index, entry_t, exit_t)`` tuples.

    Ordered by ascending ``entry_t``, with at most ``3N - 2`` entries. Rays
    missing the grid box give an empty list.

    Examples
    --------
    >>> from sklf.geometry import Ray, VoxelGrid, voxels_intersected
    >>> grid = VoxelGrid(1, box_min=(-1, -1, -1), box_max=(1, 1, 1))
    >>> voxels_intersected(grid, Ray([0, 0, -2], [0, 0, 1]))
    [(0, 1.0, 3.0)]
    """
    if ray.origin.ndim != 1:
        raise ValueError("voxels_intersected() takes a single ray, use traverse_voxels")

    traversal = traverse_voxels(grid, ray, t_min=t_min)
    count = traversal.counts[0]
    return [
        (
            int(traversal.voxel_indices[0, k]),
            float(traversal.entry_t[0, k]),
            float(traversal.exit_t[0, k]),
        )
        for k in range(count)
    ]


def _voxel_slabs(grid: VoxelGrid, cells: np.ndarray, ray: Ray) -> tuple:
    """Entry and exit parameters of a single ray for each voxel in ``cells``."""
    box_min, width = np.array(grid.box_min), grid.voxel_width
    lo = box_min + cells * width
    hi = box_min + (cells + 1) * width
    o, d = ray.origin, ray.direction

    with np.errstate(divide="ignore", invalid="ignore"):
        ta = (lo - o) / d
        tb = (hi - o) / d
    t_near = np.minimum(ta, tb)
    t_far = np.maximum(ta, tb)

    # axes with zero direction either contain the ray or exclude the voxel; a
    # ray lying on a face between voxels belongs to the one on its positive side
    parallel = d == 0
    box_max = box_min + grid.resolution * width
    own_cell = np.clip(np.floor((o - box_min) / width), 0, grid.resolution - 1)
    inside = (cells == own_cell) & (o >= box_min) & (o <= box_max)
    t_near = np.where(parallel, np.where(inside, -np.inf, np.inf), t_near)
    t_far = np.where(parallel, np.where(inside, np.inf, -np.inf), t_far)

    return t_near.max(axis=-1), t_far.min(axis=-1)


def voxels_intersected_brute_force(
    grid: VoxelGrid, ray: Ray, t_min: float = 0.0
) -> list[tuple[int, float, float]]:
    """
    Reference implementation of :func:`voxels_intersected`, slab-testing every
    voxel of the grid independently. Cost is cubic in the resolution.
    """
    all_indices = np.arange(grid.num_voxels)
    t0, t1 = _voxel_slabs(grid, grid.cell_coords(all_indices), ray)
    t0 = np.maximum(t0, t_min)
    hit = t1 - t0 > SEGMENT_EPS

    order = np.argsort(t0[hit], kind="stable")
    return [
        (int(i), float(a), float(b))
        for i, a, b in zip(all_indices[hit][order], t0[hit][order], t1[hit][order])
    ]


def localize(
    grid: VoxelGrid, voxel_index: int, ray: Ray, normalize: bool = True
) -> LocalRayCoords:
    """
    Re-parameterize a ray with respect to a single voxel.

    Space is translated so that the voxel center lies at the origin, and the ray
    is intersected with the voxel's front (lower z) and back (upper z) faces. The
    xy coordinates of these intersections form the local ray coordinates. With
    ``normalize=True`` they are divided by the voxel half-width per axis, so that
    intersections inside the faces lie in ``[-1, 1]``.

    Parameters
    ----------
    grid : VoxelGrid
        Voxel grid.

    voxel_index : int
        Flat index of the voxel.

    ray : Ray
        Single ray.

    normalize : bool, default=True
        Whether to express coordinates in voxel half-width units.

    Returns
    -------
    local : LocalRayCoords
        Local coordinates, together with the ray segment inside the voxel. The
        segment is computed for the whole line, so ``entry_t`` may be negative.

    Examples
    --------
    >>> from sklf.geometry import Ray, VoxelGrid, localize
    >>> grid = VoxelGrid(1, box_min=(-0.5, -0.5, -0.5), box_max=(0.5, 0.5, 0.5))
    >>> local = localize(grid, 0, Ray([-0.25, 0, -1], [0, 0, 1]), normalize=False)
    >>> local.coords
    array([-0.25,  0.  , -0.25,  0.  ])
    """
    if ray.origin.ndim != 1:
        raise ValueError("localize() takes a single ray, use localize_batch")
    if abs(ray.direction[2]) <= PARALLEL_EPS:
        raise ParallelRayError(
            f"Ray is parallel to the faces of voxel {voxel_index}, "
            f"|direction.z| <= {PARALLEL_EPS}"
        )

    cells = grid.cell_coords(np.array([voxel_index]))
    t0, t1 = _voxel_slabs(grid, cells, ray)
    if not t1[0] - t0[0] > SEGMENT_EPS:
        raise NoIntersectionError(f"Ray does not intersect voxel {voxel_index}")

    coords = localize_batch(
        grid,
        np.array([voxel_index]),
        ray.origin[np.newaxis],
        ray.direction[np.newaxis],
        normalize=normalize,
    )[0]
    return LocalRayCoords(int(voxel_index), coords, float(t0[0]), float(t1[0]))


def localize_batch(
    grid: VoxelGrid,
    voxel_indices: np.ndarray,
    origins: np.ndarray,
    directions: np.ndarray,
    normalize: bool = True,
) -> np.ndarray:
    """
    Vectorized :func:`localize` for (voxel, ray) pairs, returning only the local
    coordinates of shape (n, 4). Intersection with the voxels is not checked.
    """
    if np.any(np.abs(directions[:, 2]) <= PARALLEL_EPS):
        raise ParallelRayError("Ray is parallel to the voxel faces")

    centers = grid.voxel_centers(voxel_indices)
    half = grid.half_width
    o = origins - centers
    d = directions

    t_front = (-half[2] - o[:, 2]) / d[:, 2]
    t_back = (half[2] - o[:, 2]) / d[:, 2]
    front = o[:, :2] + t_front[:, np.newaxis] * d[:, :2]
    back = o[:, :2] + t_back[:, np.newaxis] * d[:, :2]

    if normalize:
        front = front / half[:2]
        back = back / half[:2]

    return np.concatenate([front, back], axis=1)
