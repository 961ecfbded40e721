"""Image quality metrics and light field analysis."""

from .embedding import embedding_pca, embedding_pca_image, pca_to_rgb
from .epi import epi_from_dataset, epi_from_model, epi_slice
from .image import PSNR_CAP, gaussian_window, psnr, ssim
from .report import MetricsReport
