from dataclasses import dataclass

import numpy as np

from sklf.geometry.rays import Ray


@dataclass(frozen=True)
class PlueckerCoords:
    """Plücker coordinates: unit direction and moment ``origin x direction``."""

    direction: np.ndarray
    moment: np.ndarray

    def as_array(self) -> np.ndarray:
        """Concatenated 6D representation (direction, moment)."""
        return np.concatenate([self.direction, self.moment], axis=-1)


def to_pluecker(ray: Ray) -> PlueckerCoords:
    """
    Plücker coordinates of rays.

    Unlike the two-plane chart, they are defined for rays of any orientation, and
    do not change when the origin slides along the ray.

    Examples
    --------
    >>> from sklf.geometry import Ray, to_pluecker
    >>> to_pluecker(Ray([1, 0, 0], [0, 0, 1])).moment
    array([ 0., -1.,  0.])
    """
    return PlueckerCoords(
        direction=ray.direction.copy(),
        moment=np.cross(ray.origin, ray.direction),
    )
