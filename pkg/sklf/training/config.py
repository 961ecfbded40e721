from dataclasses import dataclass, fields
from numbers import Integral, Real
from typing import ClassVar, Optional

from sklearn.utils._param_validation import (
    Interval,
    StrOptions,
    validate_parameter_constraints,
)

from sklf.geometry import TwoPlaneParam, VoxelGrid
from sklf.models import LightFieldModel, build_model
from sklf.scenes import GRID_BOX

# fraction of training spent opening frequency bands when ease_iters is not set
DEFAULT_EASE_FRACTION = 0.4


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters of light field training.

    Parameters
    ----------
    embedding_kind : {"affine", "feature", "none"}, default="affine"
        Ray-space embedding of the model.

    latent_dim : int, default=32
        Latent dimension ``N`` of the embedding.

    num_bands : int, default=None
        Positional encoding bands, ``None`` picks 10 without subdivision and 8
        with it.

    embedding_bands : int, default=0
        Positional encoding bands of the embedding network input, 0 means raw
        coordinates.

    width : int, default=256
        Hidden layer width of both networks.

    depth : int, default=8
        Number of hidden layers of both networks.

    skip_layer : int, default=4
        Hidden layer receiving the network input again, ``None`` disables it.

    grid_resolution : int, default=None
        Subdivide the scene into ``grid_resolution^3`` voxels, ``None`` trains a
        single light field.

    grid_box_min, grid_box_max : tuple of 3 floats
        Corners of the voxel grid box.

    batch_size : int, default=1024
        Rays per iteration.

    total_iters : int, default=20000
        Number of training iterations.

    ease_iters : int, default=None
        Iterations over which frequency bands are opened, at most
        ``total_iters``. ``None`` uses the first 40% of training.

    lr_init, lr_final : float, default=5e-4, 5e-5
        Learning rate at the first and the last iteration, decayed exponentially.

    max_grad_norm : float, default=10.0
        Joint gradient norm of all networks is clipped to this value.

    seed : int, default=0
        Root seed of network initialization and ray sampling.

    eval_every : int, default=0
        Evaluate holdout PSNR every this many iterations, 0 disables it.

    checkpoint_every : int, default=0
        Save a checkpoint every this many iterations, 0 disables it.

    log_every : int, default=100
        Flush the metrics log every this many iterations.

    grad_chunk_size : int, default=4096
        Rays per gradient chunk. Chunk gradients are computed in parallel and
        summed in chunk order.

    sample_with_replacement : bool, default=True
        Draw batch rays uniformly with replacement, or as a random permutation
        without repeats.

    n_jobs : int, default=None
        The number of jobs to run in parallel. ``None`` means 1 unless in a
        :obj:`joblib.parallel_backend` context. ``-1`` means using all processors.

    deterministic : bool, default=False
        Force a single worker, making loss traces bitwise reproducible.
    """

    _parameter_constraints: ClassVar[dict] = {
        "embedding_kind": [StrOptions({"affine", "feature", "none"})],
        "latent_dim": [Interval(Integral, 1, None, closed="left")],
        "num_bands": [Interval(Integral, 0, None, closed="left"), None],
        "embedding_bands": [Interval(Integral, 0, None, closed="left")],
        "width": [Interval(Integral, 1, None, closed="left")],
        "depth": [Interval(Integral, 0, None, closed="left")],
        "skip_layer": [Interval(Integral, 1, None, closed="left"), None],
        "grid_resolution": [Interval(Integral, 1, None, closed="left"), None],
        "grid_box_min": [tuple, list],
        "grid_box_max": [tuple, list],
        "batch_size": [Interval(Integral, 1, None, closed="left")],
        "total_iters": [Interval(Integral, 1, None, closed="left")],
        "ease_iters": [Interval(Integral, 1, None, closed="left"), None],
        "lr_init": [Interval(Real, 0, None, closed="left")],
        "lr_final": [Interval(Real, 0, None, closed="left")],
        "max_grad_norm": [Interval(Real, 0, None, closed="neither")],
        "seed": [Interval(Integral, 0, None, closed="left")],
        "eval_every": [Interval(Integral, 0, None, closed="left")],
        "checkpoint_every": [Interval(Integral, 0, None, closed="left")],
        "log_every": [Interval(Integral, 1, None, closed="left")],
        "grad_chunk_size": [Interval(Integral, 1, None, closed="left")],
        "sample_with_replacement": ["boolean"],
        "n_jobs": [Integral, None],
        "deterministic": ["boolean"],
    }

    embedding_kind: str = "affine"
    latent_dim: int = 32
    num_bands: Optional[int] = None
    embedding_bands: int = 0
    width: int = 256
    depth: int = 8
    skip_layer: Optional[int] = 4
    grid_resolution: Optional[int] = None
    grid_box_min: tuple = GRID_BOX[0]
    grid_box_max: tuple = GRID_BOX[1]
    batch_size: int = 1024
    total_iters: int = 20000
    ease_iters: Optional[int] = None
    lr_init: float = 5e-4
    lr_final: float = 5e-5
    max_grad_norm: float = 10.0
    seed: int = 0
    eval_every: int = 0
    checkpoint_every: int = 0
    log_every: int = 100
    grad_chunk_size: int = 4096
    sample_with_replacement: bool = True
    n_jobs: Optional[int] = None
    deterministic: bool = False

    def __post_init__(self):
        validate_parameter_constraints(
            self._parameter_constraints, self.to_dict(), caller_name="TrainConfig"
        )
        object.__setattr__(self, "grid_box_min", tuple(self.grid_box_min))
        object.__setattr__(self, "grid_box_max", tuple(self.grid_box_max))
        if self.ease_iters is not None and self.ease_iters > self.total_iters:
            raise ValueError(
                f"ease_iters must not exceed total_iters, got {self.ease_iters} "
                f"and {self.total_iters}"
            )
        if self.skip_layer is not None and self.skip_layer >= self.depth:
            raise ValueError(
                f"skip_layer must be smaller than depth, got {self.skip_layer} "
                f"and {self.depth}"
            )

    @property
    def effective_ease_iters(self) -> int:
        if self.ease_iters is not None:
            return self.ease_iters
        return max(1, round(DEFAULT_EASE_FRACTION * self.total_iters))

    @property
    def effective_n_jobs(self) -> Optional[int]:
        return 1 if self.deterministic else self.n_jobs

    def grid(self) -> Optional[VoxelGrid]:
        if self.grid_resolution is None:
            return None
        return VoxelGrid(self.grid_resolution, self.grid_box_min, self.grid_box_max)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        """Config from a dictionary, unknown keys raise ``ValueError``."""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown training options: {sorted(unknown)}")
        return cls(**data)


def model_from_config(
    config: TrainConfig, param: TwoPlaneParam, seed=None
) -> LightFieldModel:
    """Freshly initialized model with the architecture of ``config``."""
    return build_model(
        embedding_kind=config.embedding_kind,
        latent_dim=config.latent_dim,
        num_bands=config.num_bands,
        embedding_bands=config.embedding_bands,
        width=config.width,
        depth=config.depth,
        skip_layer=config.skip_layer,
        grid=config.grid(),
        two_plane=param,
        seed=config.seed if seed is None else seed,
    )
