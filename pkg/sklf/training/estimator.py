from typing import Optional, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils._param_validation import InvalidParameterError
from sklearn.utils.validation import check_is_fitted

from sklf.exceptions import EmptySplitError
from sklf.geometry import Ray
from sklf.models import render_rays
from sklf.scenes import GRID_BOX, LightFieldDataset
from sklf.training.config import TrainConfig
from sklf.training.evaluation import evaluate
from sklf.training.loop import train


class LightFieldRegressor(BaseEstimator):
    """
    Neural light field with a ray-space embedding, as a scikit-learn estimator.

    The estimator maps rays to colors. It is fitted on the training views of a
    :class:`~sklf.scenes.LightFieldDataset`, and scored with the mean PSNR of the
    held out views. All hyperparameters are described in
    :class:`~sklf.training.TrainConfig`.

    Parameters
    ----------
    verbose : int or dict, default=0
        Controls the verbosity of training. If higher than zero, progress bar and
        start and end messages are shown. If a dictionary is passed, it is treated
        as kwargs for ``tqdm()``.

    Attributes
    ----------
    state_ : TrainState
        Final training state.

    model_ : LightFieldModel
        Trained model.

    config_ : TrainConfig
        Configuration used for training.

    Examples
    --------
    >>> from sklf.scenes import generate_recipe
    >>> from sklf.training import LightFieldRegressor
    >>> dataset = generate_recipe("plane0", image_w=16, image_h=16)
    >>> regressor = LightFieldRegressor(
    ...     embedding_kind="none", width=32, depth=2, skip_layer=None,
    ...     batch_size=256, total_iters=10,
    ... )
    >>> regressor = regressor.fit(dataset)
    >>> regressor.score(dataset)  # doctest: +SKIP
    11.42
    """

    _parameter_constraints: dict = {
        **TrainConfig._parameter_constraints,
        "verbose": ["verbose", dict],
    }

    def __init__(
        self,
        embedding_kind: str = "affine",
        latent_dim: int = 32,
        num_bands: Optional[int] = None,
        embedding_bands: int = 0,
        width: int = 256,
        depth: int = 8,
        skip_layer: Optional[int] = 4,
        grid_resolution: Optional[int] = None,
        grid_box_min: tuple = GRID_BOX[0],
        grid_box_max: tuple = GRID_BOX[1],
        batch_size: int = 1024,
        total_iters: int = 20000,
        ease_iters: Optional[int] = None,
        lr_init: float = 5e-4,
        lr_final: float = 5e-5,
        max_grad_norm: float = 10.0,
        seed: int = 0,
        eval_every: int = 0,
        checkpoint_every: int = 0,
        log_every: int = 100,
        grad_chunk_size: int = 4096,
        sample_with_replacement: bool = True,
        n_jobs: Optional[int] = None,
        deterministic: bool = False,
        verbose: Union[int, dict] = 0,
    ):
        self.embedding_kind = embedding_kind
        self.latent_dim = latent_dim
        self.num_bands = num_bands
        self.embedding_bands = embedding_bands
        self.width = width
        self.depth = depth
        self.skip_layer = skip_layer
        self.grid_resolution = grid_resolution
        self.grid_box_min = grid_box_min
        self.grid_box_max = grid_box_max
        self.batch_size = batch_size
        self.total_iters = total_iters
        self.ease_iters = ease_iters
        self.lr_init = lr_init
        self.lr_final = lr_final
        self.max_grad_norm = max_grad_norm
        self.seed = seed
        self.eval_every = eval_every
        self.checkpoint_every = checkpoint_every
        self.log_every = log_every
        self.grad_chunk_size = grad_chunk_size
        self.sample_with_replacement = sample_with_replacement
        self.n_jobs = n_jobs
        self.deterministic = deterministic
        self.verbose = verbose

    def _validate_params(self) -> None:
        # override Scikit-learn validation to make stacktrace nicer
        try:
            super()._validate_params()
        except InvalidParameterError as e:
            raise InvalidParameterError(str(e)) from None

    def _train_config(self) -> TrainConfig:
        params = self.get_params()
        params.pop("verbose")
        return TrainConfig(**params)

    def fit(self, X: LightFieldDataset, y=None) -> "LightFieldRegressor":
        """
        Train on the training views of dataset ``X``. ``y`` is ignored, targets
        are the dataset pixels.
        """
        self._validate_params()
        self.config_ = self._train_config()
        self.state_ = train(X, self.config_, verbose=self.verbose)
        self.model_ = self.state_.model
        return self

    def predict(self, X: Ray) -> np.ndarray:
        """
        Colors of rays.

        Parameters
        ----------
        X : Ray
            Bundle of rays.

        Returns
        -------
        colors : ndarray of shape (n_rays, 3)
        """
        check_is_fitted(self, "model_")
        colors, _ = render_rays(self.model_, X, n_jobs=self.config_.effective_n_jobs)
        return colors

    def score(self, X: LightFieldDataset, y=None) -> float:
        """Mean PSNR of the held out views of dataset ``X``, in dB."""
        check_is_fitted(self, "model_")
        if len(X.holdout_indices) == 0:
            raise EmptySplitError("Dataset has no held out views to score on")
        report = evaluate(
            self.model_, X, "holdout", n_jobs=self.config_.effective_n_jobs
        )
        return report.mean_psnr
