from dataclasses import dataclass, replace

import numpy as np

from sklf.exceptions import ShapeMismatchError
from sklf.net.mlp import MlpParams


@dataclass(frozen=True)
class AdamState:
    """
    Adam optimizer state of a single network.

    ``m`` and ``v`` are first and second moment estimates, with the same structure
    as the optimized parameters.
    """

    m: MlpParams
    v: MlpParams
    step_count: int = 0
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, params: MlpParams, lr: float = 5e-4, **kwargs) -> "AdamState":
        return cls(params.zeros_like(), params.zeros_like(), lr=lr, **kwargs)


def _check_structure(a: MlpParams, b: MlpParams, name: str) -> None:
    shapes_a = [x.shape for x in a.arrays()]
    shapes_b = [x.shape for x in b.arrays()]
    if shapes_a != shapes_b:
        raise ShapeMismatchError(
            f"{name} do not match parameter shapes: {shapes_b} vs {shapes_a}"
        )


def adam_step(
    params: MlpParams, grads: MlpParams, state: AdamState
) -> tuple[MlpParams, AdamState]:
    """
    One Adam update with bias correction.

    Inputs are not modified; new parameter and state objects are returned.

    Parameters
    ----------
    params : MlpParams
        Current parameters.

    grads : MlpParams
        Loss gradients with the same structure as ``params``.

    state : AdamState
        Optimizer state, whose ``lr`` is used as the step size.

    Returns
    -------
    params : MlpParams
        Updated parameters.

    state : AdamState
        Updated moments with ``step_count`` incremented.
    """
    _check_structure(params, grads, "Gradients")
    _check_structure(params, state.m, "Optimizer moments")

    step = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**step
    correction2 = 1.0 - b2**step

    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(
        params.arrays(), grads.arrays(), state.m.arrays(), state.v.arrays()
    ):
        dtype = p.dtype
        m = (b1 * m + (1 - b1) * g).astype(dtype)
        v = (b2 * v + (1 - b2) * g * g).astype(dtype)
        m_hat = m / correction1
        v_hat = v / correction2
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        new_params.append((p - update).astype(dtype))
        new_m.append(m)
        new_v.append(v)

    new_state = replace(
        state,
        m=state.m.with_arrays(new_m),
        v=state.v.with_arrays(new_v),
        step_count=step,
    )
    return params.with_arrays(new_params), new_state


def exponential_lr(
    iteration: int, total_iters: int, lr_init: float = 5e-4, lr_final: float = 5e-5
) -> float:
    """
    Learning rate decaying exponentially from ``lr_init`` to ``lr_final`` over
    ``total_iters`` iterations. Falls back to linear interpolation when either end
    is zero.

    Examples
    --------
    >>> from sklf.net import exponential_lr
    >>> exponential_lr(0, 100)  # doctest: +SKIP
    0.0005
    """
    frac = min(max(iteration / max(total_iters, 1), 0.0), 1.0)
    if lr_init <= 0 or lr_final <= 0:
        return float((1 - frac) * lr_init + frac * lr_final)
    return float(np.exp((1 - frac) * np.log(lr_init) + frac * np.log(lr_final)))


def global_norm(grads: list[MlpParams]) -> float:
    """Euclidean norm of all gradient arrays of several networks together."""
    total = 0.0
    for g in grads:
        for arr in g.arrays():
            total += float(np.sum(np.square(arr, dtype=np.float64)))
    return float(np.sqrt(total))


def clip_by_global_norm(
    grads: list[MlpParams], max_norm: float = 10.0
) -> tuple[list[MlpParams], float]:
    """
    Rescale gradients of several networks jointly so that their global norm does
    not exceed ``max_norm``. Returns clipped gradients and the norm before
    clipping.
    """
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0:
        return grads, norm

    scale = max_norm / norm
    clipped = [
        g.with_arrays([(a * scale).astype(a.dtype) for a in g.arrays()]) for g in grads
    ]
    return clipped, norm
