import os
from dataclasses import replace
from pathlib import Path
from time import time
from typing import Optional, Union

import joblib.logger
import numpy as np
import pandas as pd
from tqdm.auto import tqdm

from sklf.encoding import progress_at
from sklf.exceptions import NonFiniteLossError
from sklf.geometry import Ray
from sklf.models import loss_and_gradients
from sklf.net import MlpParams, adam_step, clip_by_global_norm, exponential_lr
from sklf.scenes import LightFieldDataset
from sklf.training.checkpoint import save_checkpoint
from sklf.training.config import TrainConfig
from sklf.training.evaluation import evaluate
from sklf.training.sampling import TrainPixels, sample_batch
from sklf.training.state import TrainState, init_train_state
from sklf.utils import progress_settings, run_in_parallel

LOG_COLUMNS = ["iteration", "loss", "psnr", "pe_progress", "lr", "evals_per_ray"]


def _sum_chunks(
    results: list[tuple[float, list[MlpParams], np.ndarray]], n_rays: int
) -> tuple[float, list[MlpParams], np.ndarray]:
    # chunk losses are means, weight them by chunk size, in chunk order
    loss = 0.0
    total = None
    for chunk_loss, grads, evals in results:
        weight = len(evals) / n_rays
        loss += weight * chunk_loss
        scaled = [[weight * arr for arr in net.arrays()] for net in grads]
        if total is None:
            total = scaled
        else:
            total = [
                [acc + arr for acc, arr in zip(acc_net, net)]
                for acc_net, net in zip(total, scaled)
            ]

    nets = [
        net.with_arrays([arr.astype(net.dtype) for arr in arrays])
        for net, arrays in zip(results[0][1], total)
    ]
    evals = np.concatenate([evals for _, _, evals in results])
    return loss, nets, evals


def batch_loss_and_gradients(
    state: TrainState,
    rays: Ray,
    targets: np.ndarray,
    chunk_size: int,
    n_jobs: Optional[int] = None,
) -> tuple[float, list[MlpParams], np.ndarray]:
    """
    Mean squared error of a batch and its gradients, computed over chunks of
    ``chunk_size`` rays. Chunks may be processed in parallel, their results are
    always summed in chunk order, so the result does not depend on ``n_jobs``.
    """
    model = state.model
    origins = np.atleast_2d(rays.origin)
    directions = np.atleast_2d(rays.direction)
    n_rays = len(origins)
    starts = np.arange(0, n_rays, chunk_size)

    def chunk_gradients(chunk_starts: np.ndarray) -> list:
        return [
            loss_and_gradients(
                model,
                Ray(origins[s : s + chunk_size], directions[s : s + chunk_size]),
                targets[s : s + chunk_size],
            )
            for s in chunk_starts
        ]

    results = run_in_parallel(
        chunk_gradients,
        data=starts,
        n_jobs=n_jobs,
        batch_size=1,
        flatten_results=True,
        prefer="threads",
    )
    return _sum_chunks(results, n_rays)


def _check_finite(loss: float, grads: list[MlpParams], state: TrainState) -> None:
    finite_grads = all(
        np.all(np.isfinite(arr)) for net in grads for arr in net.arrays()
    )
    if np.isfinite(loss) and finite_grads:
        return
    previous = state.loss_trace[-5:]
    raise NonFiniteLossError(
        f"Training diverged at iteration {state.iteration}: loss={loss}, "
        f"finite gradients={finite_grads}, lr={state.adam[0].lr:.3g}, "
        f"previous losses={previous}"
    )


def train_step(
    state: TrainState, rays: Ray, targets: np.ndarray, config: TrainConfig
) -> tuple[TrainState, float]:
    """
    One optimization step on a batch of rays.

    The frequency easing position and learning rate are set from the iteration
    counter, the mean squared error gradients of all networks are clipped jointly
    to ``config.max_grad_norm`` and applied with Adam.

    Parameters
    ----------
    state : TrainState
        Training state, updated in place.

    rays : Ray
        Batch rays.

    targets : ndarray of shape (n_rays, 3)
        Target colors.

    config : TrainConfig
        Training hyperparameters.

    Returns
    -------
    state : TrainState
        The updated state.

    loss : float
        Batch loss before the update.
    """
    num_bands = state.model.ray_pe.num_bands
    progress = progress_at(state.iteration, config.effective_ease_iters, num_bands)
    lr = exponential_lr(
        state.iteration, config.total_iters, config.lr_init, config.lr_final
    )
    state.model = state.model.with_progress(progress)

    loss, grads, evals = batch_loss_and_gradients(
        state,
        rays,
        np.asarray(targets),
        chunk_size=config.grad_chunk_size,
        n_jobs=config.effective_n_jobs,
    )
    _check_finite(loss, grads, state)
    grads, _ = clip_by_global_norm(grads, config.max_grad_norm)

    new_nets = []
    new_adam = []
    for net, grad, adam in zip(state.model.networks(), grads, state.adam):
        net, adam = adam_step(net, grad, replace(adam, lr=lr))
        new_nets.append(net)
        new_adam.append(adam)

    state.model = state.model.with_networks(new_nets)
    state.adam = new_adam
    state.iteration += 1
    state.loss_trace.append(loss)
    state.last_evals_per_ray = float(np.mean(evals))
    return state, loss


class _MetricsLog:
    """Metrics rows appended to a CSV file in blocks."""

    def __init__(self, path: Optional[Union[str, os.PathLike]]):
        self.path = Path(path) if path is not None else None
        self.rows: list[dict] = []

    def add(self, **row) -> None:
        if self.path is not None:
            self.rows.append(row)

    def flush(self) -> None:
        if self.path is None or not self.rows:
            return
        write_header = not self.path.exists() or self.path.stat().st_size == 0
        frame = pd.DataFrame(self.rows, columns=LOG_COLUMNS)
        frame.to_csv(self.path, mode="a", header=write_header, index=False)
        self.rows = []


def _print_messages(verbose: Union[int, dict]) -> bool:
    if isinstance(verbose, int):
        return verbose > 0
    return len(verbose) > 0


def train(
    dataset: LightFieldDataset,
    config: Optional[TrainConfig] = None,
    state: Optional[TrainState] = None,
    log_path: Optional[Union[str, os.PathLike]] = None,
    checkpoint_dir: Optional[Union[str, os.PathLike]] = None,
    verbose: Union[int, dict] = 0,
) -> TrainState:
    """
    Train a light field model on the training views of a dataset.

    Every iteration samples ``config.batch_size`` training rays, renders them,
    and takes an Adam step on the mean squared error of the colors. Subdivided
    models are supervised through the composited color only.

    Parameters
    ----------
    dataset : LightFieldDataset
        Dataset with at least one training view.

    config : TrainConfig, default=None
        Hyperparameters, ``None`` uses the defaults.

    state : TrainState, default=None
        State to resume from, e.g. loaded from a checkpoint. ``None`` starts from
        a freshly initialized model. Training stops at ``config.total_iters``.

    log_path : str or PathLike, default=None
        CSV file the metrics log is appended to, with columns iteration, loss,
        psnr, pe_progress, lr and evals_per_ray. PSNR is empty except at
        evaluation iterations.

    checkpoint_dir : str or PathLike, default=None
        Directory for periodic checkpoints ``checkpoint_<iteration>.ckpt`` and
        the final ``final.ckpt``.

    verbose : int or dict, default=0
        Controls the verbosity. If higher than zero, a progress bar and start and
        end messages are shown. If ``dict`` object is provided, it is used to
        configure the ``tqdm`` progress bar.

    Returns
    -------
    state : TrainState
        State after the last iteration.
    """
    config = config if config is not None else TrainConfig()
    pixels = TrainPixels.from_dataset(dataset, split="train")
    if state is None:
        state = init_train_state(dataset, config)
    if checkpoint_dir is not None:
        checkpoint_dir = Path(checkpoint_dir)
        checkpoint_dir.mkdir(parents=True, exist_ok=True)

    evaluate_holdout = config.eval_every > 0 and len(dataset.holdout_indices) > 0
    log = _MetricsLog(log_path)
    print_messages = _print_messages(verbose)
    start_time = time()
    if print_messages:
        _print_start_msg(state, config, len(pixels))

    settings = progress_settings(verbose, config.total_iters, desc="train")
    settings["initial"] = state.iteration
    with tqdm(**settings) as pbar:
        while state.iteration < config.total_iters:
            rays, targets = sample_batch(
                pixels,
                state.rng,
                config.batch_size,
                replace=config.sample_with_replacement,
            )
            lr = exponential_lr(
                state.iteration, config.total_iters, config.lr_init, config.lr_final
            )
            state, loss = train_step(state, rays, targets, config)

            holdout_psnr = np.nan
            if evaluate_holdout and state.iteration % config.eval_every == 0:
                report = evaluate(
                    state.model, dataset, "holdout", n_jobs=config.effective_n_jobs
                )
                holdout_psnr = report.mean_psnr

            log.add(
                iteration=state.iteration,
                loss=loss,
                psnr=holdout_psnr,
                pe_progress=state.model.ray_pe.progress,
                lr=lr,
                evals_per_ray=state.last_evals_per_ray,
            )
            if state.iteration % config.log_every == 0:
                log.flush()
            if (
                checkpoint_dir is not None
                and config.checkpoint_every > 0
                and state.iteration % config.checkpoint_every == 0
            ):
                path = checkpoint_dir / f"checkpoint_{state.iteration:06d}.ckpt"
                save_checkpoint(path, state, config)

            pbar.update(1)
            pbar.set_postfix(loss=f"{loss:.3e}")

    log.flush()
    if checkpoint_dir is not None:
        save_checkpoint(checkpoint_dir / "final.ckpt", state, config)
    if print_messages:
        _print_end_msg(state, start_time, time())
    return state


def _print_start_msg(state: TrainState, config: TrainConfig, n_pixels: int) -> None:
    start_msg = (
        f"[{state.iteration}/{config.total_iters}] START "
        f"embedding={config.embedding_kind}, grid={config.grid_resolution}, "
        f"pixels={n_pixels}"
    )
    print(f"{start_msg}{(80 - len(start_msg)) * '.'}")


def _print_end_msg(state: TrainState, start_time: float, end_time: float) -> None:
    total_time = joblib.logger.short_format_time(end_time - start_time)
    end_msg = (
        f"[{state.iteration}] END loss={state.last_loss:.3e}; "
        f"total time={total_time}"
    )
    print(f"{end_msg}{(80 - len(end_msg)) * '.'}")
