from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from sklf.exceptions import DegenerateEmbeddingError

# added to norms in training mode, inference raises below this instead
NORM_EPS = 1e-8

EMBEDDING_KINDS = ("none", "feature", "affine")


@dataclass(frozen=True)
class EmbeddingKind:
    """
    Choice of ray-space embedding network.

    Parameters
    ----------
    kind : {"none", "feature", "affine"}, default="affine"
        ``"none"`` feeds encoded ray coordinates straight to the color network.
        ``"feature"`` maps rays to a normalized latent vector. ``"affine"``
        predicts a local affine map ``A r + b`` of the ray coordinates.

    latent_dim : int, default=32
        Latent dimension ``N``, ignored for ``"none"``.
    """

    kind: str = "affine"
    latent_dim: int = 32

    def __post_init__(self):
        if self.kind not in EMBEDDING_KINDS:
            raise ValueError(
                f"Embedding kind must be one of {EMBEDDING_KINDS}, got {self.kind!r}"
            )
        if int(self.latent_dim) != self.latent_dim or self.latent_dim < 1:
            raise ValueError(
                f"latent_dim must be a positive integer, got {self.latent_dim}"
            )
        object.__setattr__(self, "latent_dim", int(self.latent_dim))

    @property
    def output_dim(self) -> int:
        """Width of the embedding network output."""
        if self.kind == "affine":
            return 5 * self.latent_dim
        if self.kind == "feature":
            return self.latent_dim
        return 0


class AffineOutput(NamedTuple):
    """Normalized per-ray affine map: ``A`` of shape (n, N, 4), ``b`` of (n, N)."""

    A: np.ndarray
    b: np.ndarray


class FeatureCache(NamedTuple):
    raw: np.ndarray
    norm: np.ndarray
    eps: float


class AffineCache(NamedTuple):
    A_raw: np.ndarray
    A: np.ndarray
    b: np.ndarray
    frob: np.ndarray
    coords: np.ndarray
    eps: float


def _scaled_unit(raw: np.ndarray, norm: np.ndarray, scale: float, strict: bool):
    """``scale * raw / norm`` per row, with the training or inference guard."""
    if strict:
        if np.any(norm < NORM_EPS):
            raise DegenerateEmbeddingError(
                f"Embedding norm {float(norm.min()):.3g} is below {NORM_EPS}, "
                f"the embedding network output has collapsed"
            )
        eps = 0.0
    else:
        eps = NORM_EPS
    denom = (norm + eps).astype(raw.dtype)
    return scale * raw / denom, eps


def _scaled_unit_backward(
    raw: np.ndarray, norm: np.ndarray, scale: float, eps: float, grad: np.ndarray
) -> np.ndarray:
    """Gradient of ``scale * raw / (|raw| + eps)`` over flattened trailing axes."""
    axes = tuple(range(1, raw.ndim))
    expand = (slice(None),) + (np.newaxis,) * len(axes)
    denom = norm + eps
    safe_norm = np.where(norm > 0, norm, 1.0)
    dot = np.sum(raw * grad, axis=axes)
    coef = scale * dot / (denom**2 * safe_norm)
    return scale * grad / denom[expand] - coef[expand] * raw


def feature_forward(
    raw: np.ndarray, latent_dim: int, strict: bool = False
) -> tuple[np.ndarray, FeatureCache]:
    """
    Feature embedding ``sqrt(N) * e / |e|`` of embedding network outputs ``e`` of
    shape (n, N). With ``strict=True`` (inference) collapsed outputs raise
    :class:`~sklf.exceptions.DegenerateEmbeddingError`, otherwise a small epsilon
    is added to the norm.
    """
    norm = np.linalg.norm(raw, axis=1)
    z, eps = _scaled_unit(raw, norm[:, np.newaxis], np.sqrt(latent_dim), strict)
    return z, FeatureCache(raw, norm, eps)


def feature_backward(cache: FeatureCache, grad_z: np.ndarray) -> np.ndarray:
    latent_dim = cache.raw.shape[1]
    return _scaled_unit_backward(
        cache.raw, cache.norm, np.sqrt(latent_dim), cache.eps, grad_z
    )


def split_affine(
    raw: np.ndarray, latent_dim: int, strict: bool = False
) -> tuple[AffineOutput, np.ndarray, np.ndarray, float]:
    """
    Unpack embedding network outputs of shape (n, 5N) into a normalized affine map.

    The first ``4N`` entries form ``A`` (row-major, ``N x 4``), rescaled to
    Frobenius norm ``sqrt(4N)``. The last ``N`` entries pass through ``tanh`` to
    give the bias ``b``.
    """
    n = raw.shape[0]
    A_raw = raw[:, : 4 * latent_dim].reshape(n, latent_dim, 4)
    b = np.tanh(raw[:, 4 * latent_dim :])
    frob = np.sqrt(np.sum(A_raw * A_raw, axis=(1, 2)))
    A, eps = _scaled_unit(
        A_raw, frob[:, np.newaxis, np.newaxis], np.sqrt(4 * latent_dim), strict
    )
    return AffineOutput(A, b), A_raw, frob, eps


def affine_forward(
    raw: np.ndarray, coords: np.ndarray, latent_dim: int, strict: bool = False
) -> tuple[np.ndarray, AffineCache]:
    """
    Local affine embedding ``A r + b`` of ray coordinates ``coords`` of shape
    (n, 4), with ``(A, b)`` unpacked by :func:`split_affine`.
    """
    (A, b), A_raw, frob, eps = split_affine(raw, latent_dim, strict)
    coords = coords.astype(raw.dtype)
    z = np.einsum("nij,nj->ni", A, coords) + b
    return z, AffineCache(A_raw, A, b, frob, coords, eps)


def affine_backward(cache: AffineCache, grad_z: np.ndarray) -> np.ndarray:
    """Gradient with respect to the raw embedding network outputs, (n, 5N)."""
    n, latent_dim = cache.b.shape
    grad_A = grad_z[:, :, np.newaxis] * cache.coords[:, np.newaxis, :]
    grad_A_raw = _scaled_unit_backward(
        cache.A_raw, cache.frob, np.sqrt(4 * latent_dim), cache.eps, grad_A
    )
    grad_b_raw = grad_z * (1 - cache.b**2)
    return np.concatenate([grad_A_raw.reshape(n, 4 * latent_dim), grad_b_raw], axis=1)
