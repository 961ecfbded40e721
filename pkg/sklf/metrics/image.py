import numpy as np
from scipy.signal import convolve2d
from sklearn.metrics import mean_squared_error
from sklearn.utils._param_validation import validate_params

from sklf.exceptions import ImageTooSmallError
from sklf.utils import check_same_dimensions, ensure_image

PSNR_CAP = 99.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@validate_params(
    {
        "image_true": ["array-like"],
        "image_pred": ["array-like"],
    },
    prefer_skip_nested_validation=True,
)
def psnr(image_true: np.ndarray, image_pred: np.ndarray) -> float:
    """
    Peak signal-to-noise ratio of images with values in [0, 1].

    Computed as ``10 * log10(1 / MSE)``, with the mean squared error taken over
    all pixels and channels. Identical images get the finite cap of 99 dB, and
    larger values are clipped to it.

    Parameters
    ----------
    image_true : array-like of shape (height, width, channels) or (height, width)
        Reference image.

    image_pred : array-like of the same shape
        Compared image.

    Returns
    -------
    score : float
        PSNR in decibels.

    Examples
    --------
    >>> import numpy as np
    >>> from sklf.metrics import psnr
    >>> a = np.zeros((4, 4, 3))
    >>> psnr(a, a)
    99.0
    >>> psnr(a, a + 0.1)  # doctest: +SKIP
    20.0
    """
    a = ensure_image(image_true, name="image_true")
    b = ensure_image(image_pred, name="image_pred")
    check_same_dimensions(a, b)

    mse = mean_squared_error(a.ravel(), b.ravel())
    if mse == 0:
        return PSNR_CAP
    return float(min(10 * np.log10(1.0 / mse), PSNR_CAP))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 2D Gaussian filter of shape (size, size)."""
    coords = np.arange(size) - (size - 1) / 2
    g = np.exp(-(coords**2) / (2 * sigma**2))
    window = np.outer(g, g)
    return window / window.sum()


def _ssim_map(a: np.ndarray, b: np.ndarray, window: np.ndarray) -> np.ndarray:
    def filt(x: np.ndarray) -> np.ndarray:
        return convolve2d(x, window, mode="valid")

    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b

    numerator = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return numerator / denominator


@validate_params(
    {
        "image_true": ["array-like"],
        "image_pred": ["array-like"],
    },
    prefer_skip_nested_validation=True,
)
def ssim(image_true: np.ndarray, image_pred: np.ndarray) -> float:
    """
    Structural similarity index of images with values in [0, 1].

    Uses the standard formulation with an 11x11 Gaussian window with standard
    deviation 1.5, constants ``K1 = 0.01`` and ``K2 = 0.03`` and data range 1.
    The local SSIM map is computed for every channel over windows fully inside
    the image, and averaged over windows and channels.

    Parameters
    ----------
    image_true : array-like of shape (height, width, channels) or (height, width)
        Reference image, at least 11x11 pixels.

    image_pred : array-like of the same shape
        Compared image.

    Returns
    -------
    score : float
        SSIM in ``[-1, 1]``, 1 for identical images.

    References
    ----------
    .. [1] `Zhou Wang et al.
        "Image quality assessment: from error visibility to structural similarity"
        IEEE Transactions on Image Processing 13.4 (2004): 600-612
        <https://ieeexplore.ieee.org/document/1284395>`_

    Examples
    --------
    >>> import numpy as np
    >>> from sklf.metrics import ssim
    >>> a = np.random.default_rng(0).uniform(size=(16, 16, 3))
    >>> ssim(a, a)
    1.0
    """
    a = ensure_image(image_true, name="image_true")
    b = ensure_image(image_pred, name="image_pred")
    check_same_dimensions(a, b)
    height, width, _ = a.shape
    if height < SSIM_WINDOW or width < SSIM_WINDOW:
        raise ImageTooSmallError(
            f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, "
            f"got {height}x{width}"
        )

    window = gaussian_window()
    maps = [_ssim_map(a[..., c], b[..., c], window) for c in range(a.shape[2])]
    return float(np.mean(maps))
