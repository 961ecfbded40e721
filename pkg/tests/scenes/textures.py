import numpy as np
import pytest

from sklf.scenes import (
    CheckerTexture,
    ConstantTexture,
    ImageTexture,
    SineGratingTexture,
    texture_from_dict,
)


def test_constant_texture_shape():
    texture = ConstantTexture((0.2, 0.4, 0.6))
    colors = texture(np.zeros((5, 2)), np.zeros((5, 2)))
    assert colors.shape == (5, 2, 3)
    assert np.allclose(colors, [0.2, 0.4, 0.6])


def test_checker_texture_alternates():
    texture = CheckerTexture(cells=2, color_a=(1, 1, 1), color_b=(0, 0, 0))
    a = np.array([-0.5, 0.5, -0.5, 0.5])
    b = np.array([-0.5, -0.5, 0.5, 0.5])
    colors = texture(a, b)
    assert np.allclose(colors[:, 0], [1, 0, 0, 1])


def test_sine_grating_extremes():
    texture = SineGratingTexture(
        frequency=(1.0, 0.0), color_a=(1, 0, 0), color_b=(0, 0, 1)
    )
    # sin(pi * a) is -1 at a = -0.5 and 1 at a = 0.5
    assert np.allclose(texture(-0.5, 0.0), [1, 0, 0])
    assert np.allclose(texture(0.5, 0.0), [0, 0, 1])
    assert np.allclose(texture(0.0, 0.7), [0.5, 0, 0.5])


def test_image_texture_pixel_centers():
    image = np.zeros((2, 2, 3))
    image[0, 0] = [1, 0, 0]
    image[0, 1] = [0, 1, 0]
    image[1, 0] = [0, 0, 1]
    image[1, 1] = [1, 1, 1]
    texture = ImageTexture(image)

    # row 0 is the top of the rectangle
    assert np.allclose(texture(-0.5, 0.5), [1, 0, 0])
    assert np.allclose(texture(0.5, 0.5), [0, 1, 0])
    assert np.allclose(texture(-0.5, -0.5), [0, 0, 1])
    assert np.allclose(texture(0.0, 0.5), [0.5, 0.5, 0])
    # clamped outside the image
    assert np.allclose(texture(-1.0, 1.0), [1, 0, 0])


def test_texture_from_dict():
    texture = CheckerTexture(cells=3, color_a=(0.1, 0.2, 0.3))
    restored = texture_from_dict(texture.to_dict())
    assert restored == texture

    image_texture = texture_from_dict({"type": "image", "pixels": [[[0, 1, 0]]]})
    assert np.allclose(image_texture(0.3, -0.2), [0, 1, 0])


def test_unknown_texture_type():
    with pytest.raises(ValueError) as exc_info:
        texture_from_dict({"type": "marble"})

    assert "Unknown texture type" in str(exc_info)


@pytest.mark.parametrize("color", [(1, 0), (0.5, 0.5, 1.5), (-0.1, 0, 0)])
def test_invalid_colors(color):
    with pytest.raises(ValueError) as exc_info:
        ConstantTexture(color)

    assert "Colors must be RGB triples in [0, 1]" in str(exc_info)


def test_invalid_checker_cells():
    with pytest.raises(ValueError) as exc_info:
        CheckerTexture(cells=0)

    assert "cells must be positive" in str(exc_info)
