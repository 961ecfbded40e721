"""
Differentiable evaluation of light field models on ray batches.

Networks are evaluated once per sample: once per ray without a grid, once per
crossed voxel with one. Backward passes reuse the caches of the forward pass and
return exact gradients for every network of the model.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import expit

from sklf.encoding import posenc, posenc_backward
from sklf.geometry import (
    LocalRayCoords,
    Ray,
    localize_batch,
    to_two_plane,
    traverse_voxels,
)
from sklf.models.compositing import VoxelSample, composite_backward, composite_batch
from sklf.models.embedding import (
    AffineCache,
    AffineOutput,
    FeatureCache,
    affine_backward,
    affine_forward,
    feature_backward,
    feature_forward,
    split_affine,
)
from sklf.models.lightfield import LightFieldModel
from sklf.net import ForwardCache, MlpParams, mlp_backward, mlp_forward


@dataclass
class SampleCache:
    """Intermediate values of :func:`evaluate_samples`."""

    coords: np.ndarray
    latent: Optional[np.ndarray]
    embedding_cache: Optional[ForwardCache]
    normalization_cache: Union[FeatureCache, AffineCache, None]
    color_cache: ForwardCache
    rgb: np.ndarray
    alpha: Optional[np.ndarray]


@dataclass
class RayBatch:
    """
    Network samples of a bundle of rays.

    Sample ``j`` belongs to ray ``ray_index[j]`` and is the ``slot[j]``-th sample
    of that ray, front to back. Without a grid every ray has exactly one sample.
    """

    coords: np.ndarray
    voxel_indices: Optional[np.ndarray]
    ray_index: np.ndarray
    slot: np.ndarray
    counts: np.ndarray
    entry_t: np.ndarray

    @property
    def n_rays(self) -> int:
        return len(self.counts)

    @property
    def n_slots(self) -> int:
        return int(self.counts.max()) if len(self.counts) else 0


def _as_batch(r: np.ndarray, dim: int) -> tuple[np.ndarray, bool]:
    r = np.asarray(r)
    if r.ndim == 1:
        return r.reshape(1, dim), True
    return r, False


def voxel_features(model: LightFieldModel, voxel_indices: np.ndarray) -> np.ndarray:
    """Encoded normalized centers of the given voxels."""
    centers = model.grid.normalized_centers(voxel_indices).astype(model.dtype)
    return posenc(centers, model.voxel_pe)


def _embedding_forward(
    model: LightFieldModel, coords: np.ndarray, voxel_feats: Optional[np.ndarray]
) -> tuple[np.ndarray, ForwardCache]:
    inputs = posenc(coords, model.embedding_pe)
    if voxel_feats is not None:
        inputs = np.concatenate([inputs, voxel_feats], axis=1)
    return mlp_forward(model.embedding_net, inputs)


def _check_kind(model: LightFieldModel, kind: str) -> None:
    if model.embedding_kind.kind != kind:
        raise ValueError(
            f"Model uses embedding kind {model.embedding_kind.kind!r}, not {kind!r}"
        )


def _voxel_feats_or_none(model, voxel_index) -> Optional[np.ndarray]:
    if not model.subdivided:
        return None
    if voxel_index is None:
        raise ValueError("Subdivided models need voxel indices")
    return voxel_features(model, np.atleast_1d(voxel_index))


def embed_feature(
    model: LightFieldModel, r: np.ndarray, voxel_index=None
) -> np.ndarray:
    """
    Feature embedding of ray coordinates, normalized to norm ``sqrt(N)``.

    Parameters
    ----------
    model : LightFieldModel
        Model with embedding kind ``"feature"``.

    r : array-like of shape (4,) or (n, 4)
        Ray coordinates, voxel-local for subdivided models.

    voxel_index : int or array-like of shape (n,), default=None
        Voxels of local coordinates, required for subdivided models.

    Returns
    -------
    z : ndarray of shape (N,) or (n, N)
    """
    _check_kind(model, "feature")
    coords, single = _as_batch(r, 4)
    coords = coords.astype(model.dtype)
    voxel_feats = _voxel_feats_or_none(model, voxel_index)
    raw, _ = _embedding_forward(model, coords, voxel_feats)
    z, _ = feature_forward(raw, model.embedding_kind.latent_dim, strict=True)
    return z[0] if single else z


def affine_output(
    model: LightFieldModel, r: np.ndarray, voxel_index=None
) -> AffineOutput:
    """Normalized affine maps ``(A, b)`` predicted for ray coordinates ``r``."""
    _check_kind(model, "affine")
    coords, _ = _as_batch(r, 4)
    coords = coords.astype(model.dtype)
    voxel_feats = _voxel_feats_or_none(model, voxel_index)
    raw, _ = _embedding_forward(model, coords, voxel_feats)
    output, *_ = split_affine(raw, model.embedding_kind.latent_dim, strict=True)
    return output


def embed_affine(
    model: LightFieldModel, r: np.ndarray, voxel_index=None
) -> np.ndarray:
    """
    Local affine embedding ``A r + b`` of ray coordinates.

    The embedding network output is split into a ``N x 4`` matrix ``A``
    normalized to Frobenius norm ``sqrt(4N)`` and a bias ``b`` squashed by
    ``tanh``. Subdivided models feed the encoded voxel center to the embedding
    network as well.

    Parameters
    ----------
    model : LightFieldModel
        Model with embedding kind ``"affine"``.

    r : array-like of shape (4,) or (n, 4)
        Ray coordinates, voxel-local for subdivided models.

    voxel_index : int or array-like of shape (n,), default=None
        Voxels of local coordinates, required for subdivided models.

    Returns
    -------
    z : ndarray of shape (N,) or (n, N)
    """
    _check_kind(model, "affine")
    coords, single = _as_batch(r, 4)
    coords = coords.astype(model.dtype)
    voxel_feats = _voxel_feats_or_none(model, voxel_index)
    raw, _ = _embedding_forward(model, coords, voxel_feats)
    z, _ = affine_forward(raw, coords, model.embedding_kind.latent_dim, strict=True)
    return z[0] if single else z


def evaluate_samples(
    model: LightFieldModel,
    coords: np.ndarray,
    voxel_indices: Optional[np.ndarray] = None,
    training: bool = False,
) -> tuple[np.ndarray, Optional[np.ndarray], SampleCache]:
    """
    Run the embedding and color networks on a batch of samples.

    Parameters
    ----------
    model : LightFieldModel
        Model to evaluate.

    coords : ndarray of shape (m, 4)
        Two-plane ray coordinates, or voxel-local ones for subdivided models.

    voxel_indices : ndarray of shape (m,), default=None
        Voxel of each sample, required for subdivided models.

    training : bool, default=False
        Whether to guard embedding normalizations with a small epsilon instead of
        raising for collapsed embeddings.

    Returns
    -------
    rgb : ndarray of shape (m, 3)
        Colors in ``[0, 1]``.

    alpha : ndarray of shape (m,) or None
        Opacities in ``[0, 1]`` for subdivided models.

    cache : SampleCache
        Values needed by :func:`evaluate_samples_backward`.
    """
    coords = np.asarray(coords, dtype=model.dtype)
    voxel_feats = None
    if model.subdivided:
        if voxel_indices is None or len(voxel_indices) != len(coords):
            raise ValueError("Subdivided models need one voxel index per sample")
        voxel_feats = voxel_features(model, voxel_indices)

    kind = model.embedding_kind
    latent = None
    embedding_cache = None
    normalization_cache: Union[FeatureCache, AffineCache, None] = None
    if kind.kind == "none":
        encoded = posenc(coords, model.ray_pe)
    else:
        raw, embedding_cache = _embedding_forward(model, coords, voxel_feats)
        if kind.kind == "feature":
            latent, normalization_cache = feature_forward(
                raw, kind.latent_dim, strict=not training
            )
        else:
            latent, normalization_cache = affine_forward(
                raw, coords, kind.latent_dim, strict=not training
            )
        encoded = posenc(latent, model.latent_pe)

    if voxel_feats is not None:
        encoded = np.concatenate([encoded, voxel_feats], axis=1)
    out, color_cache = mlp_forward(model.color_net, encoded)

    rgb = expit(out[:, :3])
    alpha = expit(out[:, 3]) if model.subdivided else None
    cache = SampleCache(
        coords, latent, embedding_cache, normalization_cache, color_cache, rgb, alpha
    )
    return rgb, alpha, cache


def evaluate_samples_backward(
    model: LightFieldModel,
    cache: SampleCache,
    grad_rgb: np.ndarray,
    grad_alpha: Optional[np.ndarray] = None,
) -> list[MlpParams]:
    """
    Gradients of a scalar loss with respect to all networks of the model, given
    its gradients with respect to the sample colors and opacities.

    Returns
    -------
    grads : list of MlpParams
        Gradients in :meth:`LightFieldModel.networks` order.
    """
    dtype = model.dtype
    grad_out = [(grad_rgb * cache.rgb * (1 - cache.rgb)).astype(dtype)]
    if model.subdivided:
        if grad_alpha is None:
            grad_alpha = np.zeros_like(cache.alpha)
        grad_out.append((grad_alpha * cache.alpha * (1 - cache.alpha))[:, np.newaxis])
    grad_logits = np.concatenate(grad_out, axis=1).astype(dtype)

    color_grads, grad_encoded = mlp_backward(
        model.color_net, cache.color_cache, grad_logits
    )
    kind = model.embedding_kind
    if kind.kind == "none":
        return [color_grads]

    latent_width = grad_encoded.shape[1] - model.voxel_feature_dim
    grad_latent = posenc_backward(
        cache.latent, model.latent_pe, grad_encoded[:, :latent_width]
    )
    if kind.kind == "feature":
        grad_raw = feature_backward(cache.normalization_cache, grad_latent)
    else:
        grad_raw = affine_backward(cache.normalization_cache, grad_latent)

    embedding_grads, _ = mlp_backward(
        model.embedding_net, cache.embedding_cache, grad_raw.astype(dtype)
    )
    return [color_grads, embedding_grads]


def lf_forward(model: LightFieldModel, r: np.ndarray) -> np.ndarray:
    """
    Color of rays given by their two-plane coordinates, for models without a
    grid.

    Exactly one evaluation of the embedding and of the color network per ray.

    Parameters
    ----------
    model : LightFieldModel
        Model without subdivision.

    r : array-like of shape (4,) or (n, 4)
        Two-plane coordinates ``(x, y, u, v)``.

    Returns
    -------
    rgb : ndarray of shape (3,) or (n, 3)
    """
    if model.subdivided:
        raise ValueError("lf_forward() needs a model without subdivision")
    coords, single = _as_batch(r, 4)
    rgb, _, _ = evaluate_samples(model, coords)
    return rgb[0] if single else rgb


def lf_forward_local_batch(
    model: LightFieldModel, coords: np.ndarray, voxel_indices: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Colors (m, 3) and opacities (m,) of voxel-local ray coordinates."""
    if not model.subdivided:
        raise ValueError("lf_forward_local() needs a subdivided model")
    rgb, alpha, _ = evaluate_samples(model, coords, np.asarray(voxel_indices))
    return rgb, alpha


def lf_forward_local(model: LightFieldModel, lrc: LocalRayCoords) -> VoxelSample:
    """Color and opacity of one ray inside one voxel of a subdivided model."""
    rgb, alpha = lf_forward_local_batch(
        model, lrc.coords[np.newaxis], np.array([lrc.voxel_index])
    )
    return VoxelSample(rgb[0], float(alpha[0]), lrc.voxel_index, lrc.entry_t)


def trace_rays(model: LightFieldModel, ray: Ray) -> RayBatch:
    """
    Network samples of a bundle of rays: two-plane coordinates without a grid,
    voxel-local coordinates of every crossed voxel with one.
    """
    origins = np.atleast_2d(ray.origin)
    directions = np.atleast_2d(ray.direction)
    n_rays = len(origins)

    if not model.subdivided:
        coords = np.atleast_2d(to_two_plane(Ray(origins, directions), model.two_plane))
        return RayBatch(
            coords=coords,
            voxel_indices=None,
            ray_index=np.arange(n_rays),
            slot=np.zeros(n_rays, dtype=np.int64),
            counts=np.ones(n_rays, dtype=np.int64),
            entry_t=np.zeros(n_rays),
        )

    traversal = traverse_voxels(model.grid, Ray(origins, directions))
    valid = np.arange(model.grid.max_hits) < traversal.counts[:, np.newaxis]
    ray_index, slot = np.nonzero(valid)
    voxel_indices = traversal.voxel_indices[ray_index, slot]
    if len(ray_index):
        coords = localize_batch(
            model.grid, voxel_indices, origins[ray_index], directions[ray_index]
        )
    else:
        coords = np.zeros((0, 4))

    return RayBatch(
        coords=coords,
        voxel_indices=voxel_indices,
        ray_index=ray_index,
        slot=slot,
        counts=traversal.counts,
        entry_t=traversal.entry_t[ray_index, slot],
    )


def pad_samples(
    batch: RayBatch, rgb: np.ndarray, alpha: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Scatter samples into per-ray stacks (n_rays, K, 3) and (n_rays, K)."""
    colors = np.zeros((batch.n_rays, batch.n_slots, 3), dtype=rgb.dtype)
    alphas = np.zeros((batch.n_rays, batch.n_slots), dtype=rgb.dtype)
    colors[batch.ray_index, batch.slot] = rgb
    alphas[batch.ray_index, batch.slot] = alpha
    return colors, alphas


def forward_rays(
    model: LightFieldModel, ray: Ray, training: bool = False
) -> tuple[np.ndarray, RayBatch, SampleCache, Optional[tuple]]:
    """
    Colors of a bundle of rays, with everything needed for a backward pass.

    Returns
    -------
    colors : ndarray of shape (n_rays, 3)

    batch : RayBatch
        Samples the networks were evaluated on.

    cache : SampleCache
        Network cache of the samples.

    padded : tuple or None
        Padded sample colors and opacities of subdivided models.
    """
    batch = trace_rays(model, ray)
    rgb, alpha, cache = evaluate_samples(
        model, batch.coords, batch.voxel_indices, training=training
    )
    if not model.subdivided:
        return rgb, batch, cache, None

    colors, alphas = pad_samples(batch, rgb, alpha)
    composited = composite_batch(colors, alphas, model.background)
    return composited.astype(model.dtype), batch, cache, (colors, alphas)


def loss_and_gradients(
    model: LightFieldModel, ray: Ray, targets: np.ndarray
) -> tuple[float, list[MlpParams], np.ndarray]:
    """
    Mean squared error of predicted ray colors, and its exact gradients.

    The loss averages over rays and color channels. Subdivided models are
    supervised through the composited color only.

    Parameters
    ----------
    model : LightFieldModel
        Model to differentiate.

    ray : Ray
        Bundle of ``n`` rays.

    targets : ndarray of shape (n, 3)
        Ground truth colors.

    Returns
    -------
    loss : float
        Mean squared error.

    grads : list of MlpParams
        Loss gradients in :meth:`LightFieldModel.networks` order.

    evals : ndarray of shape (n,)
        Color network evaluations per ray.
    """
    pred, batch, cache, padded = forward_rays(model, ray, training=True)
    targets = np.asarray(targets)
    residual = pred.astype(np.float64) - targets
    loss = float(np.mean(np.square(residual)))
    grad_pred = (2.0 * residual / residual.size).astype(model.dtype)

    if padded is None:
        grads = evaluate_samples_backward(model, cache, grad_pred)
    else:
        colors, alphas = padded
        grad_colors, grad_alphas = composite_backward(
            colors, alphas, grad_pred, model.background
        )
        grads = evaluate_samples_backward(
            model,
            cache,
            grad_colors[batch.ray_index, batch.slot],
            grad_alphas[batch.ray_index, batch.slot],
        )
    return loss, grads, batch.counts
