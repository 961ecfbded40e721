import os
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from sklf.exceptions import MalformedHeaderError
from sklf.utils import ensure_image

SUPPORTED_SUFFIXES = (".png", ".ppm")


def quantize(image: np.ndarray) -> np.ndarray:
    """
    Quantize linear [0, 1] values to 8 bits, ``round(255 * clip(v, 0, 1))``.

    Examples
    --------
    >>> import numpy as np
    >>> from sklf.scenes import quantize
    >>> quantize(np.array([-0.5, 0.5, 2.0]))
    array([  0, 128, 255], dtype=uint8)
    """
    return np.round(255 * np.clip(image, 0, 1)).astype(np.uint8)


def _check_suffix(path: Path) -> None:
    if path.suffix.lower() not in SUPPORTED_SUFFIXES:
        raise ValueError(
            f"Image files must have one of suffixes {SUPPORTED_SUFFIXES}, "
            f"got {path.name}"
        )


def write_image(path: Union[str, os.PathLike], image: np.ndarray) -> None:
    """
    Write an RGB image with values in [0, 1] as 8-bit PNG or binary PPM (P6,
    maxval 255), depending on the file suffix.

    Parameters
    ----------
    path : str or PathLike
        Output file, ending with ``.png`` or ``.ppm``.

    image : array-like of shape (height, width, 3) or (height, width)
        Linear RGB or grayscale values, clipped to [0, 1] before quantization.
    """
    path = Path(path)
    _check_suffix(path)
    image = ensure_image(image)
    if image.shape[2] == 1:
        image = np.repeat(image, 3, axis=2)
    elif image.shape[2] != 3:
        raise ValueError(f"Images must have 1 or 3 channels, got {image.shape[2]}")

    pil_format = "PNG" if path.suffix.lower() == ".png" else "PPM"
    Image.fromarray(quantize(image)).save(path, format=pil_format)


def read_image(path: Union[str, os.PathLike]) -> np.ndarray:
    """
    Read a PNG or PPM file as RGB floats in [0, 1], of shape (height, width, 3).

    Raises ``FileNotFoundError`` for missing files and ``MalformedHeaderError``
    for files that are not valid images.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            pixels = np.asarray(img.convert("RGB"))
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as err:
        raise MalformedHeaderError(f"Cannot read image header of {path}") from err
    except (SyntaxError, OSError) as err:
        # truncated pixel data, invalid PPM maxval
        raise MalformedHeaderError(f"Cannot read image {path}: {err}") from err

    return pixels.astype(np.float64) / 255
