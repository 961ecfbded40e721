import json
import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from sklf.metrics.image import psnr, ssim


@dataclass(frozen=True)
class MetricsReport:
    """
    Reconstruction quality of rendered views.

    LPIPS is reported as unavailable, it requires pretrained perceptual weights.

    Parameters
    ----------
    views : sequence of int
        Evaluated view indices.

    psnr : sequence of float
        PSNR of every view, in dB.

    ssim : sequence of float
        SSIM of every view.

    split : str, default="holdout"
        Name of the evaluated dataset split.
    """

    views: Sequence[int]
    psnr: Sequence[float]
    ssim: Sequence[float]
    split: str = "holdout"
    lpips: Optional[Sequence[float]] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "views", [int(v) for v in self.views])
        object.__setattr__(self, "psnr", [float(v) for v in self.psnr])
        object.__setattr__(self, "ssim", [float(v) for v in self.ssim])
        if not len(self.views) == len(self.psnr) == len(self.ssim):
            raise ValueError(
                f"Got {len(self.views)} views, {len(self.psnr)} PSNR values "
                f"and {len(self.ssim)} SSIM values"
            )

    @classmethod
    def from_images(
        cls,
        views: Sequence[int],
        images_true: Sequence[np.ndarray],
        images_pred: Sequence[np.ndarray],
        split: str = "holdout",
    ) -> "MetricsReport":
        """Compute PSNR and SSIM of pairs of reference and rendered images."""
        return cls(
            views=views,
            psnr=[psnr(a, b) for a, b in zip(images_true, images_pred)],
            ssim=[ssim(a, b) for a, b in zip(images_true, images_pred)],
            split=split,
        )

    @property
    def num_views(self) -> int:
        return len(self.views)

    @property
    def mean_psnr(self) -> float:
        return float(np.mean(self.psnr)) if self.psnr else float("nan")

    @property
    def mean_ssim(self) -> float:
        return float(np.mean(self.ssim)) if self.ssim else float("nan")

    @property
    def lpips_available(self) -> bool:
        return self.lpips is not None

    def to_frame(self) -> pd.DataFrame:
        """Per-view metrics, one row per view, LPIPS as NaN when unavailable."""
        lpips = self.lpips if self.lpips is not None else [np.nan] * self.num_views
        return pd.DataFrame(
            {"view": self.views, "psnr": self.psnr, "ssim": self.ssim, "lpips": lpips}
        )

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "num_views": self.num_views,
            "views": self.views,
            "psnr": self.psnr,
            "ssim": self.ssim,
            "mean_psnr": self.mean_psnr,
            "mean_ssim": self.mean_ssim,
            "lpips": "unavailable" if self.lpips is None else list(self.lpips),
        }

    def summary(self) -> str:
        """One-line summary."""
        return (
            f"{self.split}: {self.num_views} views, "
            f"PSNR={self.mean_psnr:.3f} dB, SSIM={self.mean_ssim:.4f}, LPIPS=n/a"
        )

    def write(self, path_prefix: Union[str, os.PathLike]) -> list[Path]:
        """
        Write the report as ``<prefix>.json`` and a fixed-width text table
        ``<prefix>.txt``. Returns the written paths.
        """
        prefix = Path(path_prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        json_path = prefix.with_name(prefix.name + ".json")
        text_path = prefix.with_name(prefix.name + ".txt")

        with open(json_path, "w") as file:
            json.dump(self.to_dict(), file, indent=2)
            file.write("\n")

        with open(text_path, "w") as file:
            frame = self.to_frame()
            file.write(frame.to_string(index=False, float_format="{:.4f}".format))
            file.write(f"\n{self.summary()}\n")

        return [json_path, text_path]
