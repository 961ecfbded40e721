import numpy as np
import pytest

from sklf.exceptions import MalformedHeaderError
from sklf.scenes import quantize, read_image, write_image


@pytest.fixture
def image() -> np.ndarray:
    rng = np.random.default_rng(0)
    return quantize(rng.uniform(size=(3, 4, 3))) / 255


def test_quantize():
    values = np.array([0.0, 0.51 / 255, 1.49 / 255, 1.0, 1.2, -3.0])
    assert quantize(values).tolist() == [0, 1, 1, 255, 255, 0]
    assert quantize(values).dtype == np.uint8


@pytest.mark.parametrize("suffix", [".png", ".ppm"])
def test_write_read_quantized_image(tmp_path, image, suffix):
    path = tmp_path / f"image{suffix}"
    write_image(path, image)
    assert np.array_equal(read_image(path), image)


def test_ppm_layout(tmp_path, image):
    path = tmp_path / "image.ppm"
    write_image(path, image)

    data = path.read_bytes()
    header = b"P6\n4 3\n255\n"
    assert data.startswith(header)
    assert len(data) == len(header) + 4 * 3 * 3
    assert np.frombuffer(data[len(header) :], dtype=np.uint8).tolist() == (
        quantize(image).ravel().tolist()
    )


def test_grayscale_images_are_stored_as_rgb(tmp_path):
    gray = np.array([[0.0, 1.0], [0.2, 0.6]])
    path = tmp_path / "gray.png"
    write_image(path, gray)

    pixels = read_image(path)
    assert pixels.shape == (2, 2, 3)
    assert np.allclose(pixels, quantize(gray)[:, :, np.newaxis] / 255)


def test_values_are_clipped(tmp_path):
    path = tmp_path / "clipped.png"
    write_image(path, np.full((2, 2, 3), 1.7))
    assert np.all(read_image(path) == 1.0)


def test_unsupported_suffix(tmp_path, image):
    with pytest.raises(ValueError) as exc_info:
        write_image(tmp_path / "image.jpg", image)

    assert "Image files must have one of suffixes" in str(exc_info)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_image(tmp_path / "missing.png")


def test_not_an_image(tmp_path):
    path = tmp_path / "text.png"
    path.write_text("definitely not an image")
    with pytest.raises(MalformedHeaderError) as exc_info:
        read_image(path)

    assert "Cannot read image header" in str(exc_info)


def test_truncated_pixel_data(tmp_path):
    path = tmp_path / "truncated.ppm"
    path.write_bytes(b"P6\n4 3\n255\n" + bytes(10))
    with pytest.raises(MalformedHeaderError):
        read_image(path)
