import dataclasses

import numpy as np
import pandas as pd
import pytest

from sklf.exceptions import EmptyDatasetError, NonFiniteLossError
from sklf.geometry import Ray, localize
from sklf.models import lf_forward_local
from sklf.training import (
    TrainConfig,
    TrainPixels,
    batch_loss_and_gradients,
    init_train_state,
    load_checkpoint,
    sample_batch,
    train,
    train_step,
)
from sklf.training.loop import LOG_COLUMNS


def _config(config: TrainConfig, **changes) -> TrainConfig:
    return TrainConfig.from_dict({**config.to_dict(), **changes})


@pytest.fixture
def batch(occluder_dataset):
    pixels = TrainPixels.from_dataset(occluder_dataset)
    return sample_batch(pixels, np.random.default_rng(0), 96)


def test_train_step(occluder_dataset, tiny_config, batch):
    config = _config(tiny_config, ease_iters=2)
    state = init_train_state(occluder_dataset, config)
    before = state.model.color_net.weights[0].copy()

    state, loss = train_step(state, *batch, config)
    assert loss >= 0
    assert state.iteration == 1
    assert state.loss_trace == [loss]
    assert state.last_evals_per_ray == 1.0
    assert all(adam.step_count == 1 for adam in state.adam)
    assert not np.array_equal(state.model.color_net.weights[0], before)

    # bands are opened from the iteration counter before the step
    state, _ = train_step(state, *batch, config)
    assert state.model.ray_pe.progress == 1.0


def test_zero_learning_rate_keeps_parameters(occluder_dataset, tiny_config, batch):
    config = _config(tiny_config, lr_init=0.0, lr_final=0.0, num_bands=0)
    state = init_train_state(occluder_dataset, config)
    arrays = [arr.copy() for net in state.model.networks() for arr in net.arrays()]

    state, first = train_step(state, *batch, config)
    state, second = train_step(state, *batch, config)

    new_arrays = [arr for net in state.model.networks() for arr in net.arrays()]
    assert all(np.array_equal(a, b) for a, b in zip(arrays, new_arrays))
    assert first == second


def test_non_finite_loss(occluder_dataset, tiny_config, batch):
    state = init_train_state(occluder_dataset, tiny_config)
    rays, targets = batch
    with pytest.raises(NonFiniteLossError) as exc_info:
        train_step(state, rays, np.full_like(targets, np.nan), tiny_config)

    assert "Training diverged at iteration 0" in str(exc_info)


def test_chunked_gradients(occluder_dataset, tiny_config, batch):
    state = init_train_state(occluder_dataset, tiny_config)
    rays, targets = batch

    whole = batch_loss_and_gradients(state, rays, targets, chunk_size=96, n_jobs=1)
    serial = batch_loss_and_gradients(state, rays, targets, chunk_size=20, n_jobs=1)
    threaded = batch_loss_and_gradients(state, rays, targets, chunk_size=20, n_jobs=2)

    assert serial[0] == pytest.approx(threaded[0], rel=1e-6)
    assert serial[0] == pytest.approx(whole[0], rel=1e-5)
    for net_serial, net_threaded, net_whole in zip(serial[1], threaded[1], whole[1]):
        for a, b, c in zip(
            net_serial.arrays(), net_threaded.arrays(), net_whole.arrays()
        ):
            assert np.allclose(a, b, rtol=1e-6, atol=1e-9)
            assert np.allclose(a, c, rtol=1e-4, atol=1e-6)
    assert len(serial[2]) == 96


def test_train(occluder_dataset, tiny_config):
    state = train(occluder_dataset, tiny_config)
    assert state.iteration == 4
    assert len(state.loss_trace) == 4
    assert np.all(np.isfinite(state.loss_trace))


def test_trained_subdivided_alpha_depends_on_ray(occluder_dataset, tiny_config):
    config = _config(tiny_config, grid_resolution=2, total_iters=4)
    model = train(occluder_dataset, config).model
    voxel = model.grid.num_voxels - 1
    center = model.grid.voxel_centers(voxel)

    straight = Ray(center + [0.0, 0.0, -5.0], [0.0, 0.0, 1.0])
    slanted = Ray(center + [0.1, -0.2, -5.0], [-0.02, 0.04, 1.0])
    first = lf_forward_local(model, localize(model.grid, voxel, straight))
    second = lf_forward_local(model, localize(model.grid, voxel, slanted))
    assert 0 < first.alpha < 1
    assert first.alpha != second.alpha

    again = lf_forward_local(model, localize(model.grid, voxel, straight))
    assert again.alpha == first.alpha
    assert np.array_equal(again.color, first.color)


def test_train_is_deterministic(occluder_dataset, tiny_config):
    first = train(occluder_dataset, tiny_config)
    second = train(occluder_dataset, tiny_config)
    assert first.loss_trace == second.loss_trace
    first_arrays = first.model.color_net.arrays()
    for a, b in zip(first_arrays, second.model.color_net.arrays()):
        assert np.array_equal(a, b)


def test_metrics_log(tmp_path, occluder_dataset, tiny_config):
    config = _config(tiny_config, total_iters=5, eval_every=2, log_every=2)
    log_path = tmp_path / "metrics.csv"
    state = train(occluder_dataset, config, log_path=log_path)

    log = pd.read_csv(log_path)
    assert list(log.columns) == LOG_COLUMNS
    assert log["iteration"].tolist() == [1, 2, 3, 4, 5]
    assert np.allclose(log["loss"], state.loss_trace)
    assert log["psnr"].isna().tolist() == [True, False, True, False, True]
    assert np.all(log["evals_per_ray"] == 1.0)
    assert log["pe_progress"].is_monotonic_increasing
    assert log["lr"].iloc[0] == pytest.approx(config.lr_init)


def test_checkpoints(tmp_path, occluder_dataset, tiny_config):
    config = _config(tiny_config, checkpoint_every=2)
    train(occluder_dataset, config, checkpoint_dir=tmp_path / "run")

    names = sorted(path.name for path in (tmp_path / "run").iterdir())
    assert names == ["checkpoint_000002.ckpt", "checkpoint_000004.ckpt", "final.ckpt"]


def test_resume_reproduces_straight_run(tmp_path, occluder_dataset, tiny_config):
    config = _config(tiny_config, total_iters=6, checkpoint_every=3)
    straight = train(occluder_dataset, config, checkpoint_dir=tmp_path)

    checkpoint = tmp_path / "checkpoint_000003.ckpt"
    resumed_state, resumed_config = load_checkpoint(checkpoint)
    assert resumed_state.iteration == 3
    resumed = train(occluder_dataset, resumed_config, state=resumed_state)

    assert resumed.loss_trace == straight.loss_trace
    resumed_arrays = resumed.model.color_net.arrays()
    for a, b in zip(resumed_arrays, straight.model.color_net.arrays()):
        assert np.array_equal(a, b)


def test_resume_of_finished_run_is_noop(occluder_dataset, tiny_config):
    state = train(occluder_dataset, tiny_config)
    trace = list(state.loss_trace)
    again = train(occluder_dataset, tiny_config, state=state)
    assert again.iteration == 4
    assert again.loss_trace == trace


def test_subdivided_training(occluder_dataset, tiny_config):
    config = _config(tiny_config, grid_resolution=2, total_iters=2)
    state = train(occluder_dataset, config)
    assert state.model.subdivided
    assert 0 <= state.last_evals_per_ray <= 3 * 2 - 2
    assert np.all(np.isfinite(state.loss_trace))


def test_verbose_messages(capsys, occluder_dataset, tiny_config):
    train(occluder_dataset, _config(tiny_config, total_iters=1), verbose=1)
    output = capsys.readouterr().out
    assert "[0/1] START embedding=affine" in output
    assert "[1] END loss=" in output


def test_no_training_views(occluder_dataset, tiny_config):
    everything_held_out = dataclasses.replace(
        occluder_dataset, holdout=np.ones(9, dtype=bool)
    )
    with pytest.raises(EmptyDatasetError):
        train(everything_held_out, tiny_config)


def test_identical_runs_write_identical_checkpoints(
    tmp_path, occluder_dataset, tiny_config
):
    train(occluder_dataset, tiny_config, checkpoint_dir=tmp_path / "a")
    train(occluder_dataset, tiny_config, checkpoint_dir=tmp_path / "b")
    first = (tmp_path / "a" / "final.ckpt").read_bytes()
    assert first == (tmp_path / "b" / "final.ckpt").read_bytes()
