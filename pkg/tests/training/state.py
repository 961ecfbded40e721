import numpy as np

from sklf.training import TrainConfig, init_train_state
from sklf.utils import named_streams


def test_fresh_state(occluder_dataset, tiny_config):
    state = init_train_state(occluder_dataset, tiny_config)
    assert state.iteration == 0
    assert state.loss_trace == []
    assert np.isnan(state.last_loss)
    assert len(state.adam) == 2
    assert all(adam.step_count == 0 for adam in state.adam)
    assert state.model.ray_pe.progress == 0.0
    assert state.model.two_plane == occluder_dataset.param


def test_no_embedding_state(occluder_dataset, tiny_config):
    config = TrainConfig.from_dict({**tiny_config.to_dict(), "embedding_kind": "none"})
    state = init_train_state(occluder_dataset, config)
    assert len(state.adam) == 1


def test_state_follows_seed(occluder_dataset, tiny_config):
    first = init_train_state(occluder_dataset, tiny_config)
    second = init_train_state(occluder_dataset, tiny_config)
    first_arrays = first.model.color_net.arrays()
    for a, b in zip(first_arrays, second.model.color_net.arrays()):
        assert np.array_equal(a, b)

    other_seed = TrainConfig.from_dict({**tiny_config.to_dict(), "seed": 1})
    third = init_train_state(occluder_dataset, other_seed)
    assert not np.array_equal(
        first.model.color_net.weights[0], third.model.color_net.weights[0]
    )


def test_sampling_stream(occluder_dataset, tiny_config):
    state = init_train_state(occluder_dataset, tiny_config)
    expected = named_streams(tiny_config.seed)["sampling"].integers(0, 1000, 10)
    assert np.array_equal(state.rng.integers(0, 1000, 10), expected)
