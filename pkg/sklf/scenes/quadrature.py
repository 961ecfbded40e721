from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from sklf.geometry import Ray, TwoPlaneParam
from sklf.scenes.analytic import AnalyticScene

# sigma * thickness of an opaque slab, transmittance e^-20 ~ 2e-9
OPAQUE_OPTICAL_DEPTH = 20.0


@dataclass(frozen=True)
class RadianceFieldOracle:
    """
    Volumetric scene for numerical volume rendering.

    Parameters
    ----------
    density : callable
        Maps points of shape (m, 3) to non-negative densities of shape (m,).

    emission : callable
        Maps points (m, 3) and unit directions (m, 3) to emitted RGB (m, 3).

    t_near, t_far : float
        Integration bounds along the ray, ``t_near < t_far``.
    """

    density: Callable[[np.ndarray], np.ndarray]
    emission: Callable[[np.ndarray, np.ndarray], np.ndarray]
    t_near: float
    t_far: float

    def __post_init__(self):
        if not self.t_near < self.t_far:
            raise ValueError(
                f"t_near must be smaller than t_far, got {self.t_near}, {self.t_far}"
            )


def quadrature_render(
    oracle: RadianceFieldOracle,
    ray: Ray,
    num_samples: int = 1024,
    rng: Optional[np.random.Generator] = None,
    background=None,
) -> np.ndarray:
    """
    Volume rendering by numerical quadrature.

    The interval ``[t_near, t_far]`` is split into ``num_samples`` strata of
    width ``delta``, with one sample per stratum. Colors are accumulated as
    ``sum_i T_i * (1 - exp(-sigma_i * delta)) * L_i`` with transmittance
    ``T_i = exp(-sum_{j < i} sigma_j * delta)``.

    Parameters
    ----------
    oracle : RadianceFieldOracle
        Densities and emissions.

    ray : Ray
        Single ray or bundle of rays.

    num_samples : int, default=1024
        Number of strata, at least 2.

    rng : numpy.random.Generator, default=None
        If given, samples are jittered uniformly inside their strata, otherwise
        stratum midpoints are used.

    background : array-like of shape (3,), default=None
        Color added with the transmittance left at ``t_far``.

    Returns
    -------
    rgb : ndarray of shape (3,) or (n, 3)
    """
    if num_samples < 2:
        raise ValueError(f"num_samples must be at least 2, got {num_samples}")

    origins = np.atleast_2d(ray.origin)
    directions = np.atleast_2d(ray.direction)
    n_rays = len(origins)

    delta = (oracle.t_far - oracle.t_near) / num_samples
    offsets = np.full((n_rays, num_samples), 0.5)
    if rng is not None:
        offsets = rng.uniform(size=(n_rays, num_samples))
    t = oracle.t_near + (np.arange(num_samples) + offsets) * delta

    points = origins[:, np.newaxis, :] + t[..., np.newaxis] * directions[:, np.newaxis]
    flat_points = points.reshape(-1, 3)
    flat_dirs = np.repeat(directions, num_samples, axis=0)

    sigma = np.asarray(oracle.density(flat_points), dtype=np.float64)
    sigma = sigma.reshape(n_rays, num_samples)
    if np.any(sigma < 0):
        raise ValueError("Density must be non-negative")
    emitted = np.asarray(oracle.emission(flat_points, flat_dirs), dtype=np.float64)
    emitted = emitted.reshape(n_rays, num_samples, 3)

    optical = sigma * delta
    accumulated = np.cumsum(optical, axis=1)
    transmittance = np.exp(
        -np.concatenate([np.zeros((n_rays, 1)), accumulated], axis=1)
    )
    weights = transmittance[:, :-1] * (1 - np.exp(-optical))
    color = np.sum(weights[..., np.newaxis] * emitted, axis=1)
    if background is not None:
        color += transmittance[:, -1:] * np.asarray(background, dtype=np.float64)

    return color[0] if ray.origin.ndim == 1 else color


def scene_to_radiance_field(
    scene: AnalyticScene,
    param: TwoPlaneParam,
    thickness: float = 0.02,
    t_near: float = 0.0,
    t_far: float = 3.0,
) -> RadianceFieldOracle:
    """
    Volumetric version of a rectangle scene, for cross-checking the closed-form
    light field against quadrature.

    Each rectangle becomes a slab of the given thickness, starting at its plane
    and extending away from the camera plane, with constant density
    ``-ln(1 - opacity) / thickness`` (``20 / thickness`` for opaque rectangles)
    and emission given by its texture.
    """
    away = np.sign(param.z_uv - param.z_xy)
    slabs = []
    for rect in scene.rectangles:
        if rect.opacity >= 1:
            optical = OPAQUE_OPTICAL_DEPTH
        else:
            optical = -np.log1p(-rect.opacity)
        lo, hi = sorted((rect.depth, rect.depth + away * thickness))
        slabs.append((rect, lo, hi, optical / thickness))

    def members(points: np.ndarray):
        for rect, lo, hi, sigma in slabs:
            a, b = rect.local_coords(points[:, 0], points[:, 1])
            inside = (
                (points[:, 2] >= lo)
                & (points[:, 2] <= hi)
                & (np.abs(a) <= 1)
                & (np.abs(b) <= 1)
            )
            yield rect, inside, sigma, a, b

    def density(points: np.ndarray) -> np.ndarray:
        out = np.zeros(len(points))
        for _, inside, sigma, _, _ in members(points):
            out += np.where(inside, sigma, 0.0)
        return out

    def emission(points: np.ndarray, directions: np.ndarray) -> np.ndarray:
        out = np.zeros((len(points), 3))
        for rect, inside, _, a, b in members(points):
            out = np.where(inside[:, np.newaxis], rect.texture(a, b), out)
        return out

    return RadianceFieldOracle(density, emission, t_near, t_far)
