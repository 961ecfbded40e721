from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from sklf.geometry import RayCoords4D, TwoPlaneParam
from sklf.scenes.textures import ConstantTexture, Texture, texture_from_dict
from sklf.utils import ensure_vectors


@dataclass(frozen=True)
class Rectangle:
    """
    Axis-aligned textured rectangle on the plane ``z = depth``.

    Parameters
    ----------
    depth : float
        Depth ``z_st`` of the rectangle plane.

    center : tuple of 2 floats, default=(0, 0)
        Center (x, y) on the plane.

    half_extent : tuple of 2 floats, default=(1, 1)
        Half-sizes along x and y, positive.

    opacity : float, default=1.0
        Opacity in ``[0, 1]``.

    texture : Texture, default=ConstantTexture()
        Color as a function of rectangle-normalized coordinates.
    """

    depth: float
    center: tuple = (0.0, 0.0)
    half_extent: tuple = (1.0, 1.0)
    opacity: float = 1.0
    texture: Texture = field(default_factory=ConstantTexture)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(
            self, "half_extent", tuple(float(h) for h in self.half_extent)
        )
        if len(self.center) != 2 or len(self.half_extent) != 2:
            raise ValueError("Rectangle center and half_extent must be 2-vectors")
        if min(self.half_extent) <= 0:
            raise ValueError(
                f"Rectangle extents must be positive, got {self.half_extent}"
            )
        if not 0 <= self.opacity <= 1:
            raise ValueError(f"Opacity must be in [0, 1], got {self.opacity}")

    def local_coords(self, s: np.ndarray, t: np.ndarray) -> tuple:
        """Rectangle-normalized coordinates of points (s, t) on its plane."""
        a = (s - self.center[0]) / self.half_extent[0]
        b = (t - self.center[1]) / self.half_extent[1]
        return a, b

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "center": list(self.center),
            "half_extent": list(self.half_extent),
            "opacity": self.opacity,
            "texture": self.texture.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Rectangle":
        data = dict(data)
        data["texture"] = texture_from_dict(data["texture"])
        return cls(**data)


@dataclass(frozen=True)
class AnalyticScene:
    """
    Scene of textured rectangles with a closed-form light field.

    Examples
    --------
    >>> from sklf.scenes import AnalyticScene, Rectangle
    >>> scene = AnalyticScene([Rectangle(depth=0.0)])
    >>> len(scene.rectangles)
    1
    """

    rectangles: Sequence[Rectangle]
    background: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "rectangles", tuple(self.rectangles))
        object.__setattr__(self, "background", tuple(float(c) for c in self.background))

    def check_depths(self, param: TwoPlaneParam) -> None:
        """Rectangles must not lie on the camera plane of ``param``."""
        for rect in self.rectangles:
            if rect.depth == param.z_xy:
                raise ValueError(
                    f"Rectangle at depth {rect.depth} lies on the camera plane"
                )

    def to_dict(self) -> dict:
        return {
            "rectangles": [rect.to_dict() for rect in self.rectangles],
            "background": list(self.background),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalyticScene":
        return cls(
            rectangles=[Rectangle.from_dict(r) for r in data["rectangles"]],
            background=tuple(data["background"]),
        )


def plane_hit(coords: RayCoords4D, param: TwoPlaneParam, depth: float) -> tuple:
    """
    Intersection (s, t) of rays given by two-plane coordinates with the plane
    ``z = depth``, by similar triangles:
    ``s = x + (u - x) * (depth - z_xy) / (z_uv - z_xy)``.
    """
    x, y, u, v = coords[..., 0], coords[..., 1], coords[..., 2], coords[..., 3]
    scale = (depth - param.z_xy) / (param.z_uv - param.z_xy)
    return x + (u - x) * scale, y + (v - y) * scale


def analytic_lightfield(
    scene: AnalyticScene, r: RayCoords4D, param: TwoPlaneParam
) -> np.ndarray:
    """
    Exact color of rays in a scene of textured rectangles.

    Every rectangle plane is intersected in closed form from the two-plane
    coordinates, and the textures of hit rectangles are over-composited with
    their opacities, nearest to the camera plane first. No sampling is involved.

    Parameters
    ----------
    scene : AnalyticScene
        Scene to render.

    r : array-like of shape (4,) or (n, 4)
        Two-plane ray coordinates ``(x, y, u, v)``.

    param : TwoPlaneParam
        Planes of the coordinates. Rays travel from the plane ``z_xy``.

    Returns
    -------
    rgb : ndarray of shape (3,) or (n, 3)

    Examples
    --------
    >>> import numpy as np
    >>> from sklf.geometry import TwoPlaneParam
    >>> from sklf.scenes import AnalyticScene, ConstantTexture, Rectangle
    >>> from sklf.scenes import analytic_lightfield
    >>> scene = AnalyticScene([Rectangle(0.0, texture=ConstantTexture((1, 0, 0)))])
    >>> analytic_lightfield(scene, np.zeros(4), TwoPlaneParam(-1.0, 0.0))
    array([1., 0., 0.])
    """
    coords = ensure_vectors(r, 4, name="r")
    direction = np.sign(param.z_uv - param.z_xy)
    order = sorted(
        scene.rectangles, key=lambda rect: (rect.depth - param.z_xy) * direction
    )

    color = np.zeros(coords.shape[:-1] + (3,))
    transmittance = np.ones(coords.shape[:-1])
    for rect in order:
        if (rect.depth - param.z_xy) * direction < 0:
            continue
        s, t = plane_hit(coords, param, rect.depth)
        a, b = rect.local_coords(s, t)
        inside = (np.abs(a) <= 1) & (np.abs(b) <= 1)
        alpha = np.where(inside, rect.opacity, 0.0)
        color += (transmittance * alpha)[..., np.newaxis] * rect.texture(a, b)
        transmittance = transmittance * (1 - alpha)

    color += transmittance[..., np.newaxis] * np.array(scene.background)
    return color
