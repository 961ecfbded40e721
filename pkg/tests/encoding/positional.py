import numpy as np
import pytest
from sklearn.utils._param_validation import InvalidParameterError

from sklf.encoding import (
    PosEncConfig,
    encoded_dim,
    posenc,
    posenc_backward,
    progress_at,
    window_weights,
)


def test_encoded_dim():
    assert encoded_dim(4, PosEncConfig(num_bands=6)) == 4 + 2 * 4 * 6
    assert encoded_dim(4, PosEncConfig(num_bands=6, include_input=False)) == 48
    assert encoded_dim(3, PosEncConfig(num_bands=0)) == 3


def test_posenc_shape_and_layout():
    v = np.array([[0.25, -0.5]])
    encoded = posenc(v, PosEncConfig(num_bands=2))
    assert encoded.shape == (1, encoded_dim(2, PosEncConfig(num_bands=2)))
    assert np.allclose(encoded[0, :2], v[0])
    assert np.allclose(encoded[0, 2:4], np.sin(np.pi * v[0]))
    assert np.allclose(encoded[0, 4:6], np.cos(np.pi * v[0]))
    assert np.allclose(encoded[0, 6:8], np.sin(2 * np.pi * v[0]))


def test_posenc_known_value():
    cfg = PosEncConfig(num_bands=1, include_input=False)
    assert np.allclose(posenc(np.array([0.5]), cfg), [1.0, 0.0])


def test_posenc_keeps_float32():
    encoded = posenc(np.zeros((3, 2), dtype=np.float32), PosEncConfig(num_bands=3))
    assert encoded.dtype == np.float32


def test_posenc_no_bands_no_input():
    encoded = posenc(np.ones((5, 4)), PosEncConfig(num_bands=0, include_input=False))
    assert encoded.shape == (5, 0)


@pytest.mark.parametrize(
    "progress, expected",
    [
        (0.0, [0.0, 0.0, 0.0]),
        (0.5, [0.5, 0.0, 0.0]),
        (1.0, [1.0, 0.0, 0.0]),
        (2.5, [1.0, 1.0, 0.5]),
        (3.0, [1.0, 1.0, 1.0]),
    ],
)
def test_window_weights(progress, expected):
    weights = window_weights(PosEncConfig(num_bands=3, progress=progress))
    assert np.allclose(weights, expected)


def test_window_weights_monotonic_in_progress():
    previous = np.zeros(4)
    for progress in np.linspace(0, 4, 41):
        weights = window_weights(PosEncConfig(num_bands=4, progress=progress))
        assert np.all(weights >= previous - 1e-12)
        previous = weights


def test_disabled_bands_are_zero():
    v = np.random.default_rng(0).uniform(-1, 1, size=(10, 4))
    encoded = posenc(v, PosEncConfig(num_bands=3, include_input=False, progress=1.0))
    assert np.allclose(encoded[:, 8:], 0.0)


def test_posenc_backward_matches_finite_differences():
    rng = np.random.default_rng(0)
    v = rng.uniform(-1, 1, size=(3, 4))
    cfg = PosEncConfig(num_bands=3, progress=2.3)
    weights = rng.normal(size=(3, encoded_dim(4, cfg)))

    grad = posenc_backward(v, cfg, weights)

    eps = 1e-6
    numeric = np.zeros_like(v)
    for idx in np.ndindex(*v.shape):
        plus = v.copy()
        minus = v.copy()
        plus[idx] += eps
        minus[idx] -= eps
        f_plus = np.sum(weights * posenc(plus, cfg))
        f_minus = np.sum(weights * posenc(minus, cfg))
        numeric[idx] = (f_plus - f_minus) / (2 * eps)

    assert np.allclose(grad, numeric, rtol=1e-5, atol=1e-6)


def test_posenc_backward_wrong_width():
    with pytest.raises(ValueError) as exc_info:
        posenc_backward(np.zeros((2, 4)), PosEncConfig(num_bands=2), np.zeros((2, 5)))

    assert "does not match encoding width" in str(exc_info)


def test_pos_enc_config_invalid_progress():
    with pytest.raises(ValueError) as exc_info:
        PosEncConfig(num_bands=2, progress=3.0)

    assert "progress must be in [0, 2]" in str(exc_info)


def test_pos_enc_config_with_progress_clips():
    cfg = PosEncConfig(num_bands=4)
    assert cfg.progress == 4.0
    assert cfg.with_progress(10.0).progress == 4.0
    assert cfg.with_progress(-1.0).progress == 0.0


def test_progress_at():
    assert progress_at(0, ease_iters=1000, num_bands=8) == 0.0
    assert progress_at(500, ease_iters=1000, num_bands=8) == 4.0
    assert progress_at(5000, ease_iters=1000, num_bands=8) == 8.0


def test_progress_at_invalid_iteration():
    with pytest.raises(InvalidParameterError):
        progress_at(-1, ease_iters=10, num_bands=4)
