import os
from typing import Optional, Union

import numpy as np

from sklf.exceptions import CorruptCheckpointError
from sklf.models import LightFieldModel
from sklf.net import AdamState, read_container, write_container
from sklf.training.config import TrainConfig
from sklf.training.state import TrainState


def _adam_arrays(index: int, state: AdamState) -> dict[str, np.ndarray]:
    arrays = {}
    for moment in ("m", "v"):
        params = getattr(state, moment)
        for k, arr in enumerate(params.arrays()):
            arrays[f"adam{index}/{moment}/{k}"] = arr
    return arrays


def save_checkpoint(
    path: Union[str, os.PathLike],
    state: TrainState,
    config: Optional[TrainConfig] = None,
) -> None:
    """
    Save the model, optimizer states, iteration, sampling stream and loss trace.

    The file layout is described in :mod:`sklf.net.checkpoint`. Saving a loaded
    checkpoint reproduces the file byte for byte.
    """
    arrays = dict(state.model.arrays())
    for index, adam in enumerate(state.adam):
        arrays.update(_adam_arrays(index, adam))

    meta = {
        "model": state.model.config(),
        "adam": [
            {
                "step_count": adam.step_count,
                "lr": adam.lr,
                "beta1": adam.beta1,
                "beta2": adam.beta2,
                "eps": adam.eps,
            }
            for adam in state.adam
        ],
        "iteration": state.iteration,
        "rng": state.rng.bit_generator.state,
        "loss_trace": [float(loss) for loss in state.loss_trace],
        "train_config": config.to_dict() if config is not None else None,
    }
    write_container(path, arrays, meta)


def load_model(path: Union[str, os.PathLike]) -> LightFieldModel:
    """Model stored in a checkpoint, without the training state."""
    state, _ = load_checkpoint(path)
    return state.model


def load_checkpoint(
    path: Union[str, os.PathLike],
) -> tuple[TrainState, Optional[TrainConfig]]:
    """
    Load a checkpoint written by :func:`save_checkpoint`.

    Returns
    -------
    state : TrainState
        Restored training state, bit-identical to the saved one.

    config : TrainConfig or None
        Training configuration, if it was saved.
    """
    arrays, meta = read_container(path)
    try:
        model_arrays = {
            name: arr for name, arr in arrays.items() if not name.startswith("adam")
        }
        model = LightFieldModel.from_arrays(meta["model"], model_arrays)

        adam = []
        for index, (net, hyper) in enumerate(zip(model.networks(), meta["adam"])):
            n_arrays = len(net.arrays())
            m = net.with_arrays(
                [arrays[f"adam{index}/m/{k}"] for k in range(n_arrays)]
            )
            v = net.with_arrays(
                [arrays[f"adam{index}/v/{k}"] for k in range(n_arrays)]
            )
            adam.append(AdamState(m=m, v=v, **hyper))

        bit_generator = getattr(np.random, meta["rng"]["bit_generator"])()
        bit_generator.state = meta["rng"]
        rng = np.random.Generator(bit_generator)

        config_data = meta.get("train_config")
        config = TrainConfig.from_dict(config_data) if config_data else None
    except (KeyError, TypeError, AttributeError) as err:
        raise CorruptCheckpointError(
            f"Checkpoint {path} lacks training state: {err}"
        ) from err

    state = TrainState(
        model=model,
        adam=adam,
        iteration=int(meta["iteration"]),
        rng=rng,
        loss_trace=list(meta["loss_trace"]),
    )
    return state, config
