from dataclasses import dataclass
from numbers import Integral

import numpy as np
from sklearn.utils._param_validation import Interval, validate_params

from sklf.exceptions import EmptyDatasetError
from sklf.geometry import Ray
from sklf.scenes import LightFieldDataset


@dataclass(frozen=True)
class TrainPixels:
    """Flattened training rays and their colors."""

    origins: np.ndarray
    directions: np.ndarray
    colors: np.ndarray

    def __len__(self) -> int:
        return len(self.colors)

    @classmethod
    def from_dataset(
        cls, dataset: LightFieldDataset, split: str = "train"
    ) -> "TrainPixels":
        rays, colors = dataset.pixels(split)
        return cls(
            np.atleast_2d(rays.origin), np.atleast_2d(rays.direction), colors
        )


@validate_params(
    {
        "pixels": [TrainPixels],
        "rng": [np.random.Generator],
        "batch_size": [Interval(Integral, 1, None, closed="left")],
        "replace": ["boolean"],
    },
    prefer_skip_nested_validation=True,
)
def sample_batch(
    pixels: TrainPixels,
    rng: np.random.Generator,
    batch_size: int,
    replace: bool = True,
) -> tuple[Ray, np.ndarray]:
    """
    Random batch of training rays and target colors.

    Parameters
    ----------
    pixels : TrainPixels
        Training rays.

    rng : numpy.random.Generator
        Source of randomness, advanced by the call.

    batch_size : int
        Number of rays.

    replace : bool, default=True
        Whether to draw pixels uniformly with replacement. Otherwise the batch
        is a prefix of a random permutation, so ``batch_size`` equal to the number
        of pixels visits each pixel exactly once.

    Returns
    -------
    rays : Ray
        Bundle of ``batch_size`` rays.

    colors : ndarray of shape (batch_size, 3)
        Target colors.

    Examples
    --------
    >>> import numpy as np
    >>> from sklf.training import TrainPixels, sample_batch
    >>> pixels = TrainPixels(np.zeros((4, 3)), np.tile([0, 0, 1.0], (4, 1)),
    ...                      np.eye(4, 3))
    >>> rays, colors = sample_batch(pixels, np.random.default_rng(0), 4,
    ...                             replace=False)
    >>> np.sort(colors.sum(axis=1))
    array([0., 1., 1., 1.])
    """
    n_pixels = len(pixels)
    if n_pixels == 0:
        raise EmptyDatasetError("Dataset has no training pixels")

    if replace:
        indices = rng.integers(0, n_pixels, size=batch_size)
    else:
        if batch_size > n_pixels:
            raise ValueError(
                f"Cannot draw {batch_size} distinct pixels out of {n_pixels}"
            )
        indices = rng.permutation(n_pixels)[:batch_size]

    rays = Ray(pixels.origins[indices], pixels.directions[indices])
    return rays, pixels.colors[indices]
