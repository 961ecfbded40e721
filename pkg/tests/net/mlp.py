import numpy as np
import pytest

from sklf.exceptions import ShapeMismatchError
from sklf.net import MlpParams, mlp_backward, mlp_forward, mlp_init


def _numeric_gradient(func, arr: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(arr)
    for idx in np.ndindex(*arr.shape):
        original = arr[idx]
        arr[idx] = original + eps
        plus = func()
        arr[idx] = original - eps
        minus = func()
        arr[idx] = original
        grad[idx] = (plus - minus) / (2 * eps)
    return grad


def test_mlp_init_shapes():
    params = mlp_init(input_dim=12, output_dim=3, width=256, depth=8)
    assert params.depth == 8
    assert params.width == 256
    assert params.weights[4].shape == (268, 256)
    assert params.weights[-1].shape == (256, 3)
    assert all(np.all(b == 0) for b in params.biases)
    assert params.dtype == np.float32


def test_mlp_init_linear():
    params = mlp_init(input_dim=4, output_dim=2, depth=0, skip_layer=None)
    assert len(params.weights) == 1
    assert params.width == 0


def test_mlp_init_reproducible():
    first = mlp_init(6, 3, width=16, depth=3, skip_layer=None, seed=7)
    second = mlp_init(6, 3, width=16, depth=3, skip_layer=None, seed=7)
    third = mlp_init(6, 3, width=16, depth=3, skip_layer=None, seed=8)
    assert all(np.array_equal(a, b) for a, b in zip(first.arrays(), second.arrays()))
    assert not np.array_equal(first.weights[0], third.weights[0])


def test_mlp_init_invalid_skip_layer():
    with pytest.raises(ValueError) as exc_info:
        mlp_init(4, 3, width=8, depth=2, skip_layer=4)

    assert "skip_layer must be in (0, 2)" in str(exc_info)


def test_mlp_forward_shape_mismatch():
    params = mlp_init(4, 3, width=8, depth=2, skip_layer=None)
    with pytest.raises(ShapeMismatchError) as exc_info:
        mlp_forward(params, np.zeros((5, 3)))

    assert "expects inputs of shape (n, 4)" in str(exc_info)


def test_mlp_params_shape_mismatch():
    with pytest.raises(ShapeMismatchError) as exc_info:
        MlpParams([np.zeros((4, 8)), np.zeros((7, 3))], [np.zeros(8), np.zeros(3)])

    assert "Layer 1 expects 7 inputs" in str(exc_info)


def test_with_arrays_shape_mismatch():
    params = mlp_init(4, 3, width=8, depth=1, skip_layer=None)
    arrays = params.arrays()
    arrays[0] = np.zeros((5, 8))
    with pytest.raises(ShapeMismatchError):
        params.with_arrays(arrays)


@pytest.mark.parametrize("skip_layer", [None, 2])
def test_mlp_backward_matches_finite_differences(skip_layer):
    rng = np.random.default_rng(0)
    params = mlp_init(
        5, 3, width=7, depth=3, skip_layer=skip_layer, seed=1, dtype=np.float64
    )
    for b in params.biases:
        b[:] = rng.normal(scale=0.1, size=b.shape)
    X = rng.normal(size=(4, 5))
    upstream = rng.normal(size=(4, 3))

    def loss() -> float:
        out, _ = mlp_forward(params, X)
        return float(np.sum(upstream * out))

    _, cache = mlp_forward(params, X)
    grads, grad_input = mlp_backward(params, cache, upstream)

    for arr, grad in zip(params.arrays(), grads.arrays()):
        assert np.allclose(grad, _numeric_gradient(loss, arr), rtol=1e-5, atol=1e-7)
    assert np.allclose(grad_input, _numeric_gradient(loss, X), rtol=1e-5, atol=1e-7)


def _random_mlp_configs(n: int, seed: int) -> list[tuple]:
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(n):
        depth = int(rng.integers(0, 5))
        skip_layer = None
        if depth >= 2 and rng.uniform() < 0.5:
            skip_layer = int(rng.integers(1, depth))
        input_dim = int(rng.integers(4, 81))
        output_dim = int(rng.integers(1, 133))
        width = int(rng.integers(1, 33))
        configs.append((input_dim, output_dim, width, depth, skip_layer))
    return configs


def _central_difference(func, arr: np.ndarray, idx: tuple, eps: float) -> float:
    original = arr[idx]
    arr[idx] = original + eps
    plus = func()
    arr[idx] = original - eps
    minus = func()
    arr[idx] = original
    return (plus - minus) / (2 * eps)


@pytest.mark.parametrize(
    "input_dim, output_dim, width, depth, skip_layer",
    _random_mlp_configs(20, seed=2024),
)
def test_mlp_backward_random_configurations(
    input_dim, output_dim, width, depth, skip_layer
):
    rng = np.random.default_rng(input_dim * output_dim)
    params = mlp_init(
        input_dim,
        output_dim,
        width=width,
        depth=depth,
        skip_layer=skip_layer,
        seed=5,
        dtype=np.float64,
    )
    for b in params.biases:
        b[:] = rng.normal(scale=0.1, size=b.shape)
    X = rng.normal(size=(3, input_dim))
    upstream = rng.normal(size=(3, output_dim))

    def loss() -> float:
        out, _ = mlp_forward(params, X)
        return float(np.sum(upstream * out))

    _, cache = mlp_forward(params, X)
    grads, grad_input = mlp_backward(params, cache, upstream)

    checked, skipped = 0, 0
    for arr, grad in zip([*params.arrays(), X], [*grads.arrays(), grad_input]):
        assert grad.shape == arr.shape
        for flat in rng.choice(arr.size, size=min(25, arr.size), replace=False):
            idx = np.unravel_index(flat, arr.shape)
            numeric = _central_difference(loss, arr, idx, eps=1e-6)
            refined = _central_difference(loss, arr, idx, eps=2.5e-7)
            # a ReLU kink inside the difference stencil
            if not np.isclose(numeric, refined, rtol=1e-4, atol=1e-6):
                skipped += 1
                continue
            assert np.isclose(grad[idx], numeric, rtol=1e-5, atol=1e-6)
            checked += 1

    assert skipped <= max(1, checked // 10)


def test_mlp_backward_wrong_gradient_shape():
    params = mlp_init(4, 3, width=8, depth=1, skip_layer=None)
    _, cache = mlp_forward(params, np.zeros((2, 4)))
    with pytest.raises(ShapeMismatchError) as exc_info:
        mlp_backward(params, cache, np.zeros((2, 2)))

    assert "Output gradient must have shape (2, 3)" in str(exc_info)
