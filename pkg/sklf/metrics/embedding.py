import warnings
from numbers import Integral
from typing import Optional, Union

import numpy as np
from sklearn.decomposition import PCA
from sklearn.utils._param_validation import Interval, validate_params

from sklf.exceptions import ConstantEmbeddingWarning
from sklf.models import Camera, LightFieldModel, embed_rays

# relative to the largest component range
FLAT_COMPONENT_TOL = 1e-9


@validate_params(
    {
        "embeddings": ["array-like"],
        "n_components": [Interval(Integral, 1, None, closed="left")],
    },
    prefer_skip_nested_validation=True,
)
def embedding_pca(
    embeddings: np.ndarray, n_components: int = 3
) -> tuple[np.ndarray, PCA]:
    """
    Principal components of ray embeddings.

    Embeddings are mean-centered and projected onto their leading principal
    axes. Component signs are fixed so that the largest-magnitude loading of
    every component is positive, which makes the result deterministic.

    Parameters
    ----------
    embeddings : array-like of shape (n_rays, N)
        Latent vectors of rays.

    n_components : int, default=3
        Number of components, reduced to ``min(n_rays, N)`` if needed.

    Returns
    -------
    projections : ndarray of shape (n_rays, n_components)
        Coordinates of embeddings along the components.

    pca : sklearn.decomposition.PCA
        Fitted model with sign-corrected ``components_``.

    Examples
    --------
    >>> import numpy as np
    >>> from sklf.metrics import embedding_pca
    >>> X = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    >>> projections, pca = embedding_pca(X, n_components=1)
    >>> projections.ravel()  # doctest: +SKIP
    array([-1.,  0.,  1.])
    """
    X = np.asarray(embeddings, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError(f"Embeddings must be a non-empty 2D array, got {X.shape}")

    n_components = min(n_components, *X.shape)
    pca = PCA(n_components=n_components, svd_solver="full")
    projections = pca.fit_transform(X)

    largest = np.argmax(np.abs(pca.components_), axis=1)
    signs = np.sign(pca.components_[np.arange(n_components), largest])
    signs[signs == 0] = 1
    pca.components_ *= signs[:, np.newaxis]
    projections *= signs
    return projections, pca


def pca_to_rgb(projections: np.ndarray, n_channels: int = 3) -> np.ndarray:
    """
    Map principal component coordinates to colors by per-component min-max
    normalization. Components with (numerically) no spread, and missing
    components, map to 0.5.

    Returns
    -------
    rgb : ndarray of shape (n_rays, n_channels)
    """
    projections = np.atleast_2d(np.asarray(projections, dtype=np.float64))
    rgb = np.full((len(projections), n_channels), 0.5)
    if len(projections) == 0:
        return rgb

    used = projections[:, :n_channels]
    low = used.min(axis=0)
    spread = used.max(axis=0) - low
    flat = spread <= FLAT_COMPONENT_TOL * max(float(spread.max()), 1e-300)
    for c in np.flatnonzero(~flat):
        rgb[:, c] = (used[:, c] - low[c]) / spread[c]
    return rgb


def embedding_pca_image(
    model: LightFieldModel,
    camera: Camera,
    width: int,
    height: int,
    chunk_size: Optional[int] = None,
) -> np.ndarray:
    """
    Visualize the ray embedding of a model as an RGB image, with the first three
    principal components of the latents of all pixel rays as red, green and
    blue.

    Constant embeddings have no principal components; a mid-gray image is
    returned with a :class:`ConstantEmbeddingWarning`.

    Parameters
    ----------
    model : LightFieldModel
        Model with an embedding network.

    camera : Camera
        Camera whose pixel rays are embedded.

    width, height : int
        Image size in pixels.

    chunk_size : int, default=None
        Rays embedded together, ``None`` uses the rendering default.

    Returns
    -------
    image : ndarray of shape (height, width, 3)
    """
    rays = camera.rays(width, height)
    kwargs: dict[str, Union[int, None]] = {}
    if chunk_size is not None:
        kwargs["chunk_size"] = chunk_size
    latents = embed_rays(model, rays, **kwargs)

    spread = np.ptp(latents, axis=0) if len(latents) else np.zeros(1)
    scale = max(float(np.abs(latents).max()) if latents.size else 0.0, 1.0)
    if np.all(spread <= FLAT_COMPONENT_TOL * scale):
        warnings.warn(
            "Embedding is constant over all rays, principal components are "
            "undefined and a gray image is returned",
            ConstantEmbeddingWarning,
        )
        return np.full((height, width, 3), 0.5)

    projections, _ = embedding_pca(latents, n_components=3)
    return pca_to_rgb(projections).reshape(height, width, 3)
