from numbers import Integral
from typing import Optional, Union

import numpy as np
from sklearn.utils._param_validation import StrOptions, validate_params

from sklf.exceptions import EmptySplitError
from sklf.metrics import MetricsReport
from sklf.models import LightFieldModel, render_rays
from sklf.scenes import LightFieldDataset
from sklf.utils import run_in_parallel


def render_views(
    model: LightFieldModel,
    dataset: LightFieldDataset,
    views: np.ndarray,
    n_jobs: Optional[int] = None,
    verbose: Union[int, dict] = 0,
) -> list[np.ndarray]:
    """Render dataset views with the model, in the order of ``views``."""

    def render_batch(batch: np.ndarray) -> list[np.ndarray]:
        images = []
        for view in batch:
            colors, _ = render_rays(model, dataset.view_rays(int(view)))
            images.append(colors.reshape(dataset.height, dataset.width, 3))
        return images

    return run_in_parallel(
        render_batch,
        data=np.asarray(views),
        n_jobs=n_jobs,
        batch_size=1,
        flatten_results=True,
        verbose=verbose,
        prefer="threads",
    )


@validate_params(
    {
        "model": [LightFieldModel],
        "dataset": [LightFieldDataset],
        "split": [StrOptions({"train", "holdout", "all"})],
        "n_jobs": [Integral, None],
        "verbose": ["verbose", dict],
    },
    prefer_skip_nested_validation=True,
)
def evaluate(
    model: LightFieldModel,
    dataset: LightFieldDataset,
    split: str = "holdout",
    n_jobs: Optional[int] = None,
    verbose: Union[int, dict] = 0,
) -> MetricsReport:
    """
    Render every view of a dataset split and compare it with the stored image.

    Rendering is deterministic, so evaluating the same model twice gives
    identical reports.

    Parameters
    ----------
    model : LightFieldModel
        Trained model.

    dataset : LightFieldDataset
        Dataset with reference images.

    split : {"holdout", "train", "all"}, default="holdout"
        Views to evaluate.

    n_jobs : int, default=None
        The number of jobs to run in parallel over views.

    verbose : int or dict, default=0
        Controls the verbosity when rendering views.

    Returns
    -------
    report : MetricsReport
        PSNR and SSIM of every view of the split, in view order.
    """
    views = dataset.split_indices(split)
    if len(views) == 0:
        raise EmptySplitError(f"Dataset split {split!r} contains no views")

    rendered = render_views(model, dataset, views, n_jobs=n_jobs, verbose=verbose)
    return MetricsReport.from_images(
        views, [dataset.images[v] for v in views], rendered, split=split
    )
