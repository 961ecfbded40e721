from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from sklf.exceptions import ShapeMismatchError


@dataclass
class MlpParams:
    """
    Weights of a fully connected network with ReLU hidden layers, a linear output
    layer and an optional skip connection.

    The network has ``depth`` hidden layers of size ``width``. Hidden layer
    ``skip_layer`` receives the network input concatenated to the previous
    activations, so its weight matrix has ``width + input_dim`` rows. With
    ``depth = 0`` the network is a single linear map.

    Weights are stored with shape (fan_in, fan_out), so a layer computes
    ``x @ W + b``.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    skip_layer: Optional[int] = None

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeMismatchError(
                f"Got {len(self.weights)} weight matrices and "
                f"{len(self.biases)} bias vectors"
            )
        depth = len(self.weights) - 1
        if self.skip_layer is not None and not 0 < self.skip_layer < depth:
            raise ValueError(
                f"skip_layer must be in (0, {depth}) for depth {depth}, "
                f"got {self.skip_layer}"
            )

        for layer, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.shape != (W.shape[1],):
                raise ShapeMismatchError(
                    f"Layer {layer}: weights {W.shape} and bias {b.shape} do not match"
                )
            if layer > 0:
                expected = self.weights[layer - 1].shape[1]
                if layer == self.skip_layer:
                    expected += self.input_dim
                if W.shape[0] != expected:
                    raise ShapeMismatchError(
                        f"Layer {layer} expects {W.shape[0]} inputs, previous layer "
                        f"gives {expected}"
                    )

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def depth(self) -> int:
        return len(self.weights) - 1

    @property
    def width(self) -> int:
        return self.weights[0].shape[1] if self.depth > 0 else 0

    @property
    def dtype(self) -> np.dtype:
        return self.weights[0].dtype

    def arrays(self) -> list[np.ndarray]:
        """All parameter arrays, weights and bias of each layer in turn."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend([W, b])
        return out

    def with_arrays(self, arrays: list[np.ndarray]) -> "MlpParams":
        """Network of the same structure with arrays in :meth:`arrays` order."""
        if len(arrays) != 2 * len(self.weights):
            raise ShapeMismatchError(
                f"Expected {2 * len(self.weights)} arrays, got {len(arrays)}"
            )
        for old, new in zip(self.arrays(), arrays):
            if old.shape != new.shape:
                raise ShapeMismatchError(
                    f"Array shapes differ: {old.shape} and {new.shape}"
                )
        return MlpParams(list(arrays[0::2]), list(arrays[1::2]), self.skip_layer)

    def copy(self) -> "MlpParams":
        return self.with_arrays([a.copy() for a in self.arrays()])

    def zeros_like(self) -> "MlpParams":
        return self.with_arrays([np.zeros_like(a) for a in self.arrays()])

    def astype(self, dtype) -> "MlpParams":
        return self.with_arrays([a.astype(dtype) for a in self.arrays()])

    def num_params(self) -> int:
        return sum(a.size for a in self.arrays())


@dataclass
class ForwardCache:
    """
    Layer inputs (after the skip concatenation) and hidden pre-activations of
    one forward pass, as needed by :func:`mlp_backward`.
    """

    inputs: list[np.ndarray] = field(default_factory=list)
    pre_activations: list[np.ndarray] = field(default_factory=list)


def mlp_init(
    input_dim: int,
    output_dim: int,
    width: int = 256,
    depth: int = 8,
    skip_layer: Optional[int] = 4,
    seed: Union[int, np.random.Generator, None] = 0,
    dtype=np.float32,
) -> MlpParams:
    """
    Initialize network weights.

    Weights are drawn uniformly from ``(-a, a)`` with
    ``a = sqrt(6 / (fan_in + fan_out))``, biases are zero. Identical seeds give
    bitwise identical parameters.

    Parameters
    ----------
    input_dim, output_dim : int
        Network input and output sizes.

    width : int, default=256
        Size of hidden layers.

    depth : int, default=8
        Number of hidden layers.

    skip_layer : int, default=4
        Hidden layer receiving the network input again, or ``None``.

    seed : int or numpy.random.Generator, default=0
        Seed or random generator.

    dtype : data-type, default=np.float32
        Parameter precision.

    Returns
    -------
    params : MlpParams

    Examples
    --------
    >>> from sklf.net import mlp_init
    >>> params = mlp_init(input_dim=12, output_dim=3, width=256, depth=8)
    >>> params.weights[4].shape
    (268, 256)
    """
    if input_dim < 1 or output_dim < 1:
        raise ValueError(
            f"Network dimensions must be positive, got input_dim={input_dim}, "
            f"output_dim={output_dim}"
        )
    if depth > 0 and width < 1:
        raise ValueError(f"width must be positive, got {width}")

    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for layer in range(depth + 1):
        fan_in = input_dim if layer == 0 else width
        if layer == skip_layer:
            fan_in += input_dim
        fan_out = output_dim if layer == depth else width

        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, (fan_in, fan_out)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))

    return MlpParams(weights, biases, skip_layer)


def mlp_forward(params: MlpParams, X: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """
    Evaluate the network on a batch.

    Parameters
    ----------
    params : MlpParams
        Network weights.

    X : ndarray of shape (n_samples, input_dim)
        Batch of inputs, cast to the parameter dtype.

    Returns
    -------
    output : ndarray of shape (n_samples, output_dim)
        Linear outputs of the last layer.

    cache : ForwardCache
        Intermediate values for :func:`mlp_backward`.
    """
    X = np.asarray(X, dtype=params.dtype)
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise ShapeMismatchError(
            f"Network expects inputs of shape (n, {params.input_dim}), "
            f"got {X.shape}"
        )

    cache = ForwardCache()
    h = X
    for layer, (W, b) in enumerate(zip(params.weights, params.biases)):
        if layer == params.skip_layer:
            h = np.concatenate([h, X], axis=1)
        cache.inputs.append(h)
        z = h @ W + b
        if layer == params.depth:
            return z, cache
        cache.pre_activations.append(z)
        h = np.maximum(z, 0)

    raise AssertionError("unreachable")


def mlp_backward(
    params: MlpParams, cache: ForwardCache, grad_output: np.ndarray
) -> tuple[MlpParams, np.ndarray]:
    """
    Reverse-mode gradients of the network.

    Parameters
    ----------
    params : MlpParams
        Network weights used in the forward pass.

    cache : ForwardCache
        Cache returned by :func:`mlp_forward`.

    grad_output : ndarray of shape (n_samples, output_dim)
        Gradient of a scalar loss with respect to the network outputs.

    Returns
    -------
    grads : MlpParams
        Gradients with respect to all weights and biases, summed over the batch.

    grad_input : ndarray of shape (n_samples, input_dim)
        Gradient with respect to the network inputs.
    """
    n_samples = cache.inputs[0].shape[0]
    if grad_output.shape != (n_samples, params.output_dim):
        raise ShapeMismatchError(
            f"Output gradient must have shape ({n_samples}, {params.output_dim}), "
            f"got {grad_output.shape}"
        )

    grad_W: list[np.ndarray] = [None] * (params.depth + 1)  # type: ignore
    grad_b: list[np.ndarray] = [None] * (params.depth + 1)  # type: ignore
    grad_input = np.zeros_like(cache.inputs[0])

    g = np.asarray(grad_output, dtype=params.dtype)
    for layer in range(params.depth, -1, -1):
        if layer < params.depth:
            g = g * (cache.pre_activations[layer] > 0)
        grad_W[layer] = cache.inputs[layer].T @ g
        grad_b[layer] = g.sum(axis=0)
        g = g @ params.weights[layer].T

        if layer == params.skip_layer:
            grad_input += g[:, -params.input_dim :]
            g = g[:, : -params.input_dim]

    grad_input += g
    return MlpParams(grad_W, grad_b, params.skip_layer), grad_input
