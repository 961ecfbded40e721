from dataclasses import dataclass, field

import numpy as np

from sklf.models import LightFieldModel
from sklf.net import AdamState
from sklf.scenes import LightFieldDataset
from sklf.training.config import TrainConfig, model_from_config
from sklf.utils import named_streams


@dataclass
class TrainState:
    """
    Everything needed to continue training.

    Parameters
    ----------
    model : LightFieldModel
        Current model, with the current frequency easing position.

    adam : list of AdamState
        Optimizer state of every network, in :meth:`LightFieldModel.networks`
        order.

    iteration : int
        Number of completed iterations.

    rng : numpy.random.Generator
        Ray sampling stream.

    loss_trace : list of float
        Loss of every completed iteration.
    """

    model: LightFieldModel
    adam: list[AdamState]
    iteration: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    loss_trace: list[float] = field(default_factory=list)
    last_evals_per_ray: float = float("nan")

    @property
    def last_loss(self) -> float:
        return self.loss_trace[-1] if self.loss_trace else float("nan")


def init_train_state(dataset: LightFieldDataset, config: TrainConfig) -> TrainState:
    """
    Fresh training state: networks initialized from the ``"init"`` stream of the
    root seed, ray sampling from its ``"sampling"`` stream.
    """
    streams = named_streams(config.seed)
    model = model_from_config(config, dataset.param, seed=streams["init"])
    model = model.with_progress(0.0)
    adam = [AdamState.init(net, lr=config.lr_init) for net in model.networks()]
    return TrainState(model=model, adam=adam, rng=streams["sampling"])
