import itertools
from collections.abc import Sequence
from typing import Callable, Optional, Union

from joblib import effective_n_jobs
from sklearn.utils.parallel import Parallel, delayed
from tqdm.auto import tqdm


class ProgressParallel(Parallel):
    """
    ``joblib.Parallel`` with a ``tqdm`` progress bar over completed tasks.

    Parameters
    ----------
    tqdm_settings : dict, default=None
        Keyword arguments of ``tqdm()``.
    """

    def __init__(self, *args, tqdm_settings: Optional[dict] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self._tqdm_settings: dict = dict(tqdm_settings or {})

    def __call__(self, *args, **kwargs):
        with tqdm(**self._tqdm_settings) as self._pbar:
            return Parallel.__call__(self, *args, **kwargs)

    def print_progress(self) -> None:
        self._pbar.n = self.n_completed_tasks
        self._pbar.refresh()


def progress_settings(verbose: Union[int, dict], total: int, **defaults) -> dict:
    """
    Keyword arguments of ``tqdm()`` for a ``verbose`` argument: an int switches
    the bar on when positive, a dict is used as the settings themselves.
    ``defaults`` fill settings missing from the dict.
    """
    if not isinstance(verbose, (int, dict)):
        raise ValueError(
            f"The `verbose` argument must be int or `dict`, got {type(verbose)}"
        )
    if isinstance(verbose, int):
        settings = {**defaults, "disable": verbose <= 0}
    else:
        settings = {**defaults, **verbose}
        settings.setdefault("disable", False)
    settings["total"] = total
    return settings


def split_into_batches(data: Sequence, n_jobs: int, batch_size: Optional[int]) -> list:
    """
    Consecutive batches of a sequence (list, NumPy array). Batch boundaries, and
    so the order of any reduction over batches, depend only on ``len(data)``,
    ``n_jobs`` and ``batch_size``.
    """
    if batch_size is None:
        batch_size = max(-(-len(data) // n_jobs), 1)
    elif batch_size <= 0:
        raise ValueError(f"batch_size must be positive, got {batch_size}")

    return [data[i : i + batch_size] for i in range(0, len(data), batch_size)]


def run_in_parallel(
    func: Callable,
    data: Sequence,
    n_jobs: Optional[int] = None,
    batch_size: Optional[int] = None,
    flatten_results: bool = False,
    verbose: Union[int, dict] = 0,
    prefer: Optional[str] = None,
) -> list:
    """
    Apply ``func`` to batches of ``data`` with joblib, keeping input order.

    ``func`` takes a whole batch, e.g. an array of view indices or of ray chunk
    starts, and its results are returned one per batch. With
    ``flatten_results=True``, batch results (lists) are concatenated instead.

    Parameters
    ----------
    func : Callable
        Function of a single argument, a batch of data.

    data : {sequence, array-like} of shape (n_samples,)
        Data to process.

    n_jobs : int, default=None
        The number of jobs to run in parallel. ``None`` means 1 unless in a
        :obj:`joblib.parallel_backend` context. ``-1`` means using all processors.
        See Scikit-learn documentation on ``n_jobs`` for more details.

    batch_size : int, default=None
        Number of inputs in each batch. ``None`` makes ``n_jobs`` batches of
        (nearly) equal size.

    flatten_results : bool, default=False
        Whether to concatenate batch results, e.g. lists of images into one list.

    verbose : int or dict, default=0
        Controls the verbosity. If higher than zero, a progress bar over batches
        is shown. If ``dict`` object is provided, it is used to configure the
        ``tqdm`` progress bar.

    prefer : {"threads", "processes", None}, default=None
        Soft hint for the joblib backend. Rendering and gradients spend their time
        in NumPy matrix products, which release the GIL, so they use threads and
        share network weights with the workers.

    Returns
    -------
    results : list of length (n_batches,) or (n_samples,)
        Results in input order, one entry per batch, or flattened if
        ``flatten_results=True``.

    Examples
    --------
    >>> import numpy as np
    >>> from sklf.utils import run_in_parallel
    >>> func = lambda X: [float(x.sum()) for x in X]
    >>> data = np.ones((4, 3))
    >>> run_in_parallel(func, data, n_jobs=2, flatten_results=True)
    [3.0, 3.0, 3.0, 3.0]
    """
    n_jobs = effective_n_jobs(n_jobs)
    batches = split_into_batches(data, n_jobs, batch_size)
    settings = progress_settings(verbose, len(batches))

    if settings["disable"]:
        parallel = Parallel(n_jobs=n_jobs, prefer=prefer)
    else:
        parallel = ProgressParallel(
            n_jobs=n_jobs, prefer=prefer, tqdm_settings=settings
        )

    results = parallel(delayed(func)(batch) for batch in batches)
    if flatten_results:
        return list(itertools.chain.from_iterable(results))
    return results
