from dataclasses import dataclass

import numpy as np

from sklf.exceptions import ParallelRayError
from sklf.utils.validators import ensure_vectors

# below this |direction.z| the two-plane chart is undefined
PARALLEL_EPS = 1e-9

# (x, y, u, v): intersection with pi^xy followed by intersection with pi^uv
RayCoords4D = np.ndarray


@dataclass(frozen=True)
class Ray:
    """
    A ray, or a bundle of rays, in scene space.

    Both ``origin`` and ``direction`` may be single 3-vectors of shape (3,) or
    arrays of shape (n, 3). Directions are normalized to unit length on
    construction.

    Parameters
    ----------
    origin : array-like of shape (3,) or (n, 3)
        Ray origins, in scene units.

    direction : array-like of shape (3,) or (n, 3)
        Ray directions. Any non-zero length is accepted.

    Examples
    --------
    >>> from sklf.geometry import Ray
    >>> ray = Ray(origin=[0, 0, -1], direction=[0, 0, 2])
    >>> ray.direction
    array([0., 0., 1.])
    """

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        origin = ensure_vectors(self.origin, 3, name="origin")
        direction = ensure_vectors(self.direction, 3, name="direction")
        origin, direction = np.broadcast_arrays(origin, direction)

        norm = np.linalg.norm(direction, axis=-1, keepdims=True)
        if np.any(norm == 0):
            raise ValueError("Ray direction must have non-zero length")

        object.__setattr__(self, "origin", np.array(origin))
        object.__setattr__(self, "direction", direction / norm)

    def __len__(self) -> int:
        return 1 if self.origin.ndim == 1 else self.origin.shape[0]

    def __getitem__(self, idx) -> "Ray":
        if self.origin.ndim == 1:
            raise TypeError("Single ray cannot be indexed")
        return Ray(self.origin[idx], self.direction[idx])

    def at(self, t) -> np.ndarray:
        """Points ``origin + t * direction``, ``t`` broadcast per ray."""
        t = np.asarray(t, dtype=np.float64)
        return self.origin + t[..., np.newaxis] * self.direction

    def slide(self, t) -> "Ray":
        """The same geometric ray, with the origin moved along the direction."""
        return Ray(self.at(t), self.direction)


@dataclass(frozen=True)
class TwoPlaneParam:
    """
    Two-plane ray parameterization with planes orthogonal to the z axis.

    Parameters
    ----------
    z_xy : float, default=-1.0
        Depth of the plane pi^xy, typically the camera plane.

    z_uv : float, default=0.0
        Depth of the plane pi^uv, typically the object (focal) plane.
    """

    z_xy: float = -1.0
    z_uv: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.z_xy) and np.isfinite(self.z_uv)):
            raise ValueError("Plane depths must be finite")
        if self.z_xy == self.z_uv:
            raise ValueError(
                f"Planes pi^xy and pi^uv must differ, both are at z={self.z_xy}"
            )


def intersect_ray_plane(ray: Ray, z: float) -> np.ndarray:
    """
    Intersect rays with the plane of constant depth ``z``.

    The intersection is computed on the whole line, i.e. the ray parameter may be
    negative when the plane lies behind the origin.

    Parameters
    ----------
    ray : Ray
        Single ray or bundle of rays.

    z : float
        Depth of the plane.

    Returns
    -------
    xy : ndarray of shape (2,) or (n, 2)
        Plane-local coordinates of the intersection points.

    Examples
    --------
    >>> from sklf.geometry import Ray, intersect_ray_plane
    >>> intersect_ray_plane(Ray([0, 0, 0], [1, 0, 1]), z=2.0)
    array([2., 0.])
    """
    dz = ray.direction[..., 2]
    if np.any(np.abs(dz) <= PARALLEL_EPS):
        raise ParallelRayError(
            f"Ray is parallel to the plane z={z}, |direction.z| <= {PARALLEL_EPS}"
        )

    t = (z - ray.origin[..., 2]) / dz
    return ray.origin[..., :2] + t[..., np.newaxis] * ray.direction[..., :2]


def to_two_plane(ray: Ray, param: TwoPlaneParam) -> RayCoords4D:
    """
    Two-plane coordinates (x, y, u, v) of rays.

    Parameters
    ----------
    ray : Ray
        Single ray or bundle of rays.

    param : TwoPlaneParam
        Depths of the planes pi^xy and pi^uv.

    Returns
    -------
    coords : ndarray of shape (4,) or (n, 4)
        Intersections with pi^xy, followed by intersections with pi^uv.

    Examples
    --------
    >>> from sklf.geometry import Ray, TwoPlaneParam, to_two_plane
    >>> param = TwoPlaneParam(z_xy=0.0, z_uv=1.0)
    >>> to_two_plane(Ray([0, 0, -1], [1, 0, 1]), param)
    array([1., 0., 2., 0.])
    """
    xy = intersect_ray_plane(ray, param.z_xy)
    uv = intersect_ray_plane(ray, param.z_uv)
    return np.concatenate([xy, uv], axis=-1)


def rays_from_two_plane(coords: RayCoords4D, param: TwoPlaneParam) -> Ray:
    """
    Rays starting at (x, y) on pi^xy and passing through (u, v) on pi^uv.
    Inverse of :func:`to_two_plane`.
    """
    coords = ensure_vectors(coords, 4, name="coords")
    z_xy = np.full(coords.shape[:-1] + (1,), param.z_xy)
    z_uv = np.full(coords.shape[:-1] + (1,), param.z_uv)

    start = np.concatenate([coords[..., :2], z_xy], axis=-1)
    end = np.concatenate([coords[..., 2:], z_uv], axis=-1)
    return Ray(origin=start, direction=end - start)
