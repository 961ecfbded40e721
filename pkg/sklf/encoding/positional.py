from dataclasses import dataclass
from numbers import Integral
from typing import Optional

import numpy as np
from sklearn.utils._param_validation import Interval, validate_params


@dataclass(frozen=True)
class PosEncConfig:
    """
    Positional encoding settings.

    Parameters
    ----------
    num_bands : int
        Number of frequency bands ``L``. Band ``k`` uses frequency ``2^k * pi``.

    include_input : bool, default=True
        Whether to prepend the raw input to the encoded terms.

    progress : float, default=None
        Easing position ``alpha`` in ``[0, L]``. Bands with index ``k >= alpha``
        are fully windowed out. ``None`` means ``L``, i.e. all bands active.
    """

    num_bands: int
    include_input: bool = True
    progress: Optional[float] = None

    def __post_init__(self):
        if int(self.num_bands) != self.num_bands or self.num_bands < 0:
            raise ValueError(
                f"num_bands must be a non-negative integer, got {self.num_bands}"
            )
        object.__setattr__(self, "num_bands", int(self.num_bands))
        if self.progress is None:
            object.__setattr__(self, "progress", float(self.num_bands))
        elif not 0 <= self.progress <= self.num_bands:
            raise ValueError(
                f"progress must be in [0, {self.num_bands}], got {self.progress}"
            )

    def with_progress(self, progress: float) -> "PosEncConfig":
        """Copy with a different easing position, clipped to ``[0, L]``."""
        progress = float(np.clip(progress, 0, self.num_bands))
        return PosEncConfig(self.num_bands, self.include_input, progress)

    def to_dict(self) -> dict:
        return {
            "num_bands": self.num_bands,
            "include_input": self.include_input,
            "progress": self.progress,
        }


def encoded_dim(input_dim: int, cfg: PosEncConfig) -> int:
    """Length of the encoding of a ``input_dim``-vector."""
    return input_dim * int(cfg.include_input) + 2 * input_dim * cfg.num_bands


def window_weights(cfg: PosEncConfig) -> np.ndarray:
    """
    Per-band easing weights of a windowed positional encoding.

    Band ``k`` gets weight ``(1 - cos(pi * clip(progress - k, 0, 1))) / 2``, so
    bands are switched on one after another with a smooth cosine ramp as
    ``progress`` goes from 0 to ``L``.

    Examples
    --------
    >>> from sklf.encoding import PosEncConfig, window_weights
    >>> window_weights(PosEncConfig(num_bands=2, progress=0.5))
    array([0.5, 0. ])
    """
    k = np.arange(cfg.num_bands, dtype=np.float64)
    x = np.clip(cfg.progress - k, 0.0, 1.0)
    return (1.0 - np.cos(np.pi * x)) / 2.0


def _frequencies(cfg: PosEncConfig) -> np.ndarray:
    return (2.0 ** np.arange(cfg.num_bands)) * np.pi


def posenc(v: np.ndarray, cfg: PosEncConfig) -> np.ndarray:
    """
    Windowed sinusoidal positional encoding.

    For input of dimension ``D`` the output is the optional raw input, followed by
    blocks ``w_k * sin(2^k pi v)`` and ``w_k * cos(2^k pi v)`` of width ``D`` for
    ``k = 0, ..., L - 1``, where ``w_k`` are :func:`window_weights`.

    Parameters
    ----------
    v : array-like of shape (..., D)
        Coordinates to encode.

    cfg : PosEncConfig
        Encoding settings.

    Returns
    -------
    encoded : ndarray of shape (..., encoded_dim(D, cfg))
        Encoding, in the dtype of ``v`` for floating point inputs.

    Examples
    --------
    >>> import numpy as np
    >>> from sklf.encoding import PosEncConfig, posenc
    >>> cfg = PosEncConfig(num_bands=1, include_input=False)
    >>> np.round(posenc(np.array([0.5]), cfg), 6)
    array([1., 0.])
    """
    v = np.asarray(v)
    if not np.issubdtype(v.dtype, np.floating):
        v = v.astype(np.float64)

    weights = window_weights(cfg).astype(v.dtype)
    parts = [v] if cfg.include_input else []
    for w, freq in zip(weights, _frequencies(cfg).astype(v.dtype)):
        scaled = freq * v
        parts.append(w * np.sin(scaled))
        parts.append(w * np.cos(scaled))

    if not parts:
        return np.zeros(v.shape[:-1] + (0,), dtype=v.dtype)
    return np.concatenate(parts, axis=-1)


def posenc_backward(v: np.ndarray, cfg: PosEncConfig, grad: np.ndarray) -> np.ndarray:
    """
    Gradient of a scalar loss with respect to the input of :func:`posenc`.

    Parameters
    ----------
    v : ndarray of shape (..., D)
        Input that was encoded.

    cfg : PosEncConfig
        Encoding settings used in the forward pass.

    grad : ndarray of shape (..., encoded_dim(D, cfg))
        Gradient with respect to the encoding.

    Returns
    -------
    grad_v : ndarray of shape (..., D)
    """
    v = np.asarray(v)
    dim = v.shape[-1]
    if grad.shape[-1] != encoded_dim(dim, cfg):
        raise ValueError(
            f"Gradient width {grad.shape[-1]} does not match encoding width "
            f"{encoded_dim(dim, cfg)}"
        )

    offset = 0
    grad_v = np.zeros_like(v, dtype=grad.dtype)
    if cfg.include_input:
        grad_v += grad[..., :dim]
        offset = dim

    weights = window_weights(cfg)
    for w, freq in zip(weights, _frequencies(cfg)):
        if w != 0:
            scaled = freq * v
            g_sin = grad[..., offset : offset + dim]
            g_cos = grad[..., offset + dim : offset + 2 * dim]
            grad_v += (w * freq) * (g_sin * np.cos(scaled) - g_cos * np.sin(scaled))
        offset += 2 * dim

    return grad_v


@validate_params(
    {
        "iteration": [Interval(Integral, 0, None, closed="left")],
        "ease_iters": [Interval(Integral, 1, None, closed="left")],
        "num_bands": [Interval(Integral, 0, None, closed="left")],
    },
    prefer_skip_nested_validation=True,
)
def progress_at(iteration: int, ease_iters: int, num_bands: int) -> float:
    """
    Easing position after ``iteration`` steps of a linear ramp, reaching
    ``num_bands`` at ``ease_iters`` and staying there.

    Examples
    --------
    >>> from sklf.encoding import progress_at
    >>> progress_at(500, ease_iters=1000, num_bands=8)
    4.0
    """
    return num_bands * min(iteration / ease_iters, 1.0)
