import numpy as np
import pytest

from sklf.exceptions import DimensionMismatchError
from sklf.utils import check_same_dimensions, ensure_image, ensure_vectors


def test_ensure_vectors():
    arr = ensure_vectors([1, 2, 3], dim=3)
    assert arr.dtype == np.float64
    assert arr.shape == (3,)
    assert ensure_vectors(np.zeros((5, 4)), dim=4).shape == (5, 4)


def test_ensure_vectors_wrong_dimension():
    with pytest.raises(ValueError) as exc_info:
        ensure_vectors(np.zeros((5, 2)), dim=3, name="origin")

    assert "origin must have trailing dimension 3" in str(exc_info)


def test_ensure_vectors_non_finite():
    with pytest.raises(ValueError) as exc_info:
        ensure_vectors([0.0, np.nan, 1.0], dim=3)

    assert "NaN or infinite" in str(exc_info)


def test_ensure_image_grayscale():
    image = ensure_image(np.zeros((4, 5)))
    assert image.shape == (4, 5, 1)


def test_ensure_image_wrong_shape():
    with pytest.raises(ValueError) as exc_info:
        ensure_image(np.zeros(5))

    assert "must have shape" in str(exc_info)


def test_check_same_dimensions():
    check_same_dimensions(np.zeros((2, 2, 3)), np.ones((2, 2, 3)))
    with pytest.raises(DimensionMismatchError) as exc_info:
        check_same_dimensions(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))

    assert "same dimensions" in str(exc_info)
