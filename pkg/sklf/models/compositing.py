from collections.abc import Sequence
from typing import NamedTuple

import numpy as np

from sklf.exceptions import UnsortedSamplesError


class VoxelSample(NamedTuple):
    """Color and integrated opacity predicted for a ray inside one voxel."""

    color: np.ndarray
    alpha: float
    voxel_index: int
    entry_t: float


def _transmittance(alpha: np.ndarray) -> np.ndarray:
    """Transmittance in front of each sample and after the last one, (..., K + 1)."""
    ones = np.ones_like(alpha[..., :1])
    return np.concatenate([ones, np.cumprod(1 - alpha, axis=-1)], axis=-1)


def composite_weights(alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Front-to-back compositing weights.

    Parameters
    ----------
    alpha : ndarray of shape (..., K)
        Opacities of samples sorted front to back. Padding samples use alpha 0.

    Returns
    -------
    weights : ndarray of shape (..., K)
        Sample weights ``T_i * alpha_i`` with transmittance
        ``T_i = prod_{j < i} (1 - alpha_j)``.

    background_weight : ndarray of shape (...)
        Transmittance left after all samples.
    """
    alpha = np.asarray(alpha)
    transmittance = _transmittance(alpha)
    return transmittance[..., :-1] * alpha, transmittance[..., -1]


def composite_batch(
    colors: np.ndarray, alpha: np.ndarray, background=(0.0, 0.0, 0.0)
) -> np.ndarray:
    """
    Over-composite padded per-ray sample stacks.

    Parameters
    ----------
    colors : ndarray of shape (n_rays, K, 3)
        Sample colors, front to back.

    alpha : ndarray of shape (n_rays, K)
        Sample opacities, 0 for padding.

    background : array-like of shape (3,), default=(0, 0, 0)
        Color seen through all samples.

    Returns
    -------
    color : ndarray of shape (n_rays, 3)
    """
    weights, background_weight = composite_weights(alpha)
    background = np.asarray(background, dtype=colors.dtype)
    return (
        np.sum(weights[..., np.newaxis] * colors, axis=-2)
        + background_weight[..., np.newaxis] * background
    )


def composite_backward(
    colors: np.ndarray,
    alpha: np.ndarray,
    grad_out: np.ndarray,
    background=(0.0, 0.0, 0.0),
) -> tuple[np.ndarray, np.ndarray]:
    """
    Gradients of :func:`composite_batch` with respect to sample colors and
    opacities.

    The opacity gradient uses ``dc / d alpha_i = T_i (c_i - R_i)``, where ``R_i``
    is the color composited from all samples behind ``i`` and the background,
    accumulated back to front.
    """
    transmittance = _transmittance(alpha)[..., :-1]
    weights = transmittance * alpha
    grad_colors = weights[..., np.newaxis] * grad_out[..., np.newaxis, :]

    behind = np.empty_like(colors)
    acc = np.broadcast_to(
        np.asarray(background, dtype=colors.dtype), colors[..., 0, :].shape
    ).copy()
    for k in range(alpha.shape[-1] - 1, -1, -1):
        behind[..., k, :] = acc
        a = alpha[..., k, np.newaxis]
        acc = a * colors[..., k, :] + (1 - a) * acc

    grad_alpha = transmittance * np.sum(
        grad_out[..., np.newaxis, :] * (colors - behind), axis=-1
    )
    return grad_colors, grad_alpha


def composite(
    samples: Sequence[VoxelSample], background=(0.0, 0.0, 0.0)
) -> np.ndarray:
    """
    Over-composite samples of a single ray, front to back.

    ``c = sum_i prod_{j < i} (1 - alpha_j) * alpha_i * c_i``, plus the background
    color times the remaining transmittance.

    Parameters
    ----------
    samples : sequence of VoxelSample
        Samples sorted by ascending ``entry_t``.

    background : array-like of shape (3,), default=(0, 0, 0)
        Background color.

    Returns
    -------
    color : ndarray of shape (3,)

    Examples
    --------
    >>> from sklf.models import VoxelSample, composite
    >>> samples = [
    ...     VoxelSample((1.0, 0.0, 0.0), 0.5, voxel_index=0, entry_t=0.0),
    ...     VoxelSample((0.0, 1.0, 0.0), 1.0, voxel_index=1, entry_t=1.0),
    ... ]
    >>> composite(samples)
    array([0.5, 0.5, 0. ])
    """
    entry_t = np.array([s.entry_t for s in samples], dtype=np.float64)
    if np.any(np.diff(entry_t) < 0):
        raise UnsortedSamplesError(
            f"Samples must be sorted by entry distance, got {entry_t.tolist()}"
        )

    background = np.asarray(background, dtype=np.float64)
    if not samples:
        return background.copy()

    colors = np.array([s.color for s in samples], dtype=np.float64)
    alpha = np.array([s.alpha for s in samples], dtype=np.float64)
    return composite_batch(colors[np.newaxis], alpha[np.newaxis], background)[0]
