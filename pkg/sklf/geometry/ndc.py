import numpy as np

from sklf.exceptions import BehindNearPlaneError, ParallelRayError
from sklf.geometry.rays import PARALLEL_EPS, Ray
from sklf.utils.validators import ensure_vectors


def ndc_project_points(
    points: np.ndarray, focal: float, width: int, height: int, near: float
) -> np.ndarray:
    """
    Normalized device coordinates of camera-space points.

    Forward-facing convention: the camera looks down the -z axis, the near plane
    at ``z = -near`` maps to NDC depth -1 and points at infinity to +1.

    Parameters
    ----------
    points : array-like of shape (3,) or (n, 3)
        Camera-space points with negative z.

    focal : float
        Focal length in pixels.

    width, height : int
        Image size in pixels.

    near : float
        Distance to the near plane.

    Returns
    -------
    points_ndc : ndarray of the same shape as ``points``
    """
    points = ensure_vectors(points, 3, name="points")
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    return np.stack(
        [
            -focal / (width / 2) * x / z,
            -focal / (height / 2) * y / z,
            1 + 2 * near / z,
        ],
        axis=-1,
    )


def world_to_ndc(ray: Ray, focal: float, width: int, height: int, near: float) -> Ray:
    """
    Transform forward-facing rays to normalized device coordinates.

    Ray origins are first moved along the ray to the near plane ``z = -near``, then
    mapped with the projective NDC transform. The result is the same set of points
    as projecting every point of the original ray with :func:`ndc_project_points`
    (for points beyond the near plane). Directions of the returned rays are unit
    length, so NDC ray parameters differ from the original ones.

    Parameters
    ----------
    ray : Ray
        Camera-space rays, looking down -z.

    focal : float
        Focal length in pixels.

    width, height : int
        Image size in pixels.

    near : float
        Distance to the near plane, must be positive.

    Returns
    -------
    ray_ndc : Ray
        Rays in NDC space.

    Examples
    --------
    >>> from sklf.geometry import Ray, world_to_ndc
    >>> ndc = world_to_ndc(Ray([0, 0, 0], [0, 0, -1]), 100.0, 64, 64, near=1.0)
    >>> ndc.origin
    array([ 0.,  0., -1.])
    """
    o, d = ray.origin, ray.direction
    dz = d[..., 2]
    if np.any(np.abs(dz) <= PARALLEL_EPS):
        raise ParallelRayError("Ray is parallel to the near plane")

    t = -(near + o[..., 2]) / dz
    o = o + t[..., np.newaxis] * d
    oz = o[..., 2]
    if np.any(oz >= 0):
        raise BehindNearPlaneError(
            f"Ray origin shifted to the near plane has non-negative z, near={near}"
        )

    fx = focal / (width / 2)
    fy = focal / (height / 2)
    origin_ndc = np.stack(
        [-fx * o[..., 0] / oz, -fy * o[..., 1] / oz, 1 + 2 * near / oz], axis=-1
    )
    direction_ndc = np.stack(
        [
            -fx * (d[..., 0] / dz - o[..., 0] / oz),
            -fy * (d[..., 1] / dz - o[..., 1] / oz),
            -2 * near / oz,
        ],
        axis=-1,
    )
    return Ray(origin_ndc, direction_ndc)
