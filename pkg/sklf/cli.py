"""
Command line interface of scikit-lightfields.

Every sub-command writes its results to an output directory, together with
``outputs.json`` listing the produced files. One-line summaries are printed to
stdout, errors to stderr. Exit codes:

- ``0`` - success
- ``2`` - invalid command line or option values
- ``3`` - missing, unreadable or malformed files
- ``4`` - numerical errors, e.g. diverged training or out of range slices
"""

import argparse
import json
import sys
import warnings
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

from sklf.exceptions import FileFormatError, NumericalError
from sklf.metrics import embedding_pca_image, epi_slice
from sklf.models import Camera, render_image
from sklf.scenes import (
    RECIPES,
    LightFieldDataset,
    generate_recipe,
    load_dataset,
    save_dataset,
    write_image,
)
from sklf.training import (
    TrainConfig,
    evaluate,
    load_checkpoint,
    load_model,
    train,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

OUTPUTS_NAME = "outputs.json"

# flag destination -> TrainConfig field
_TRAIN_FLAGS = {
    "embedding": "embedding_kind",
    "latent_dim": "latent_dim",
    "num_bands": "num_bands",
    "net_width": "width",
    "net_depth": "depth",
    "grid_resolution": "grid_resolution",
    "batch_size": "batch_size",
    "iters": "total_iters",
    "ease_iters": "ease_iters",
    "lr_init": "lr_init",
    "lr_final": "lr_final",
    "eval_every": "eval_every",
    "checkpoint_every": "checkpoint_every",
    "log_every": "log_every",
    "seed": "seed",
    "workers": "n_jobs",
}


def _global_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--seed", type=int, default=None, help="root random seed (default: 0)"
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="parallel workers for rendering, evaluation and gradients",
    )
    parser.add_argument(
        "--deterministic",
        action="store_true",
        help="force single-worker reductions",
    )
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="JSON file with training options, overridden by flags",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="show progress bars and status messages",
    )
    return parser


def _add_size(parser: argparse.ArgumentParser, default: Optional[int]) -> None:
    parser.add_argument("--width", type=int, default=default, help="image width")
    parser.add_argument("--height", type=int, default=default, help="image height")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with all sub-commands."""
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="sklf",
        description="Train and render neural light fields with ray-space embedding",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser(
        "generate", parents=[common], help="render a dataset of an analytic scene"
    )
    generate.add_argument(
        "--recipe", required=True, choices=sorted(RECIPES), help="scene recipe"
    )
    generate.add_argument("--grid-rows", type=int, default=None)
    generate.add_argument("--grid-cols", type=int, default=None)
    _add_size(generate, default=64)
    generate.add_argument("--out", required=True, help="dataset directory")

    train_cmd = commands.add_parser(
        "train", parents=[common], help="train a model on a dataset"
    )
    train_cmd.add_argument("--dataset", required=True, help="dataset directory")
    train_cmd.add_argument("--out", required=True, help="run directory")
    train_cmd.add_argument("--resume", default=None, help="checkpoint to resume")
    train_cmd.add_argument(
        "--embedding", choices=["none", "feature", "affine"], default=None
    )
    train_cmd.add_argument("--latent-dim", type=int, default=None)
    train_cmd.add_argument("--num-bands", type=int, default=None)
    train_cmd.add_argument("--net-width", type=int, default=None)
    train_cmd.add_argument("--net-depth", type=int, default=None)
    train_cmd.add_argument(
        "--grid-resolution", type=int, default=None, help="voxels per axis"
    )
    train_cmd.add_argument("--batch-size", type=int, default=None)
    train_cmd.add_argument("--iters", type=int, default=None, help="total iterations")
    train_cmd.add_argument("--ease-iters", type=int, default=None)
    train_cmd.add_argument("--lr-init", type=float, default=None)
    train_cmd.add_argument("--lr-final", type=float, default=None)
    train_cmd.add_argument("--eval-every", type=int, default=None)
    train_cmd.add_argument("--checkpoint-every", type=int, default=None)
    train_cmd.add_argument("--log-every", type=int, default=None)

    render = commands.add_parser(
        "render", parents=[common], help="render images from a checkpoint"
    )
    render.add_argument("--checkpoint", required=True)
    render.add_argument("--out", required=True, help="output directory")
    render.add_argument(
        "--dataset", default=None, help="render the cameras of this dataset"
    )
    render.add_argument(
        "--split", choices=["train", "holdout", "all"], default="all"
    )
    render.add_argument(
        "--start",
        type=float,
        nargs=3,
        default=[0.0, 0.0, -1.0],
        metavar=("X", "Y", "Z"),
        help="first camera of a linear path",
    )
    render.add_argument(
        "--end",
        type=float,
        nargs=3,
        default=None,
        metavar=("X", "Y", "Z"),
        help="last camera of a linear path (default: --start)",
    )
    render.add_argument("--frames", type=int, default=1, help="cameras on the path")
    render.add_argument("--target-depth", type=float, default=0.0)
    render.add_argument("--extent", type=float, default=1.0)
    _add_size(render, default=None)
    render.add_argument(
        "--count-evals",
        action="store_true",
        help="write color network evaluation counts to evals.json",
    )

    eval_cmd = commands.add_parser(
        "eval", parents=[common], help="PSNR and SSIM of a checkpoint on a dataset"
    )
    eval_cmd.add_argument("--checkpoint", required=True)
    eval_cmd.add_argument("--dataset", required=True)
    eval_cmd.add_argument(
        "--split", choices=["train", "holdout", "all"], default="holdout"
    )
    eval_cmd.add_argument("--out", required=True, help="output directory")

    epi = commands.add_parser(
        "epi", parents=[common], help="epipolar-plane image of a dataset or model"
    )
    epi.add_argument("--dataset", required=True, help="dataset directory")
    epi.add_argument(
        "--checkpoint", default=None, help="slice this model instead of the dataset"
    )
    epi.add_argument("--camera-index", type=int, default=0)
    epi.add_argument("--pixel-index", type=int, default=0)
    epi.add_argument(
        "--axis", choices=["horizontal", "vertical"], default="horizontal"
    )
    epi.add_argument("--num-cameras", type=int, default=None)
    epi.add_argument("--out", required=True, help="output directory")

    embedviz = commands.add_parser(
        "embedviz", parents=[common], help="principal components of the embedding"
    )
    embedviz.add_argument("--checkpoint", required=True)
    embedviz.add_argument(
        "--dataset", default=None, help="take the camera from this dataset"
    )
    embedviz.add_argument("--view", type=int, default=0, help="dataset view")
    embedviz.add_argument(
        "--camera",
        type=float,
        nargs=3,
        default=[0.0, 0.0, -1.0],
        metavar=("X", "Y", "Z"),
        help="camera position, without a dataset",
    )
    _add_size(embedviz, default=None)
    embedviz.add_argument("--out", required=True, help="output directory")
    return parser


def _n_jobs(args: argparse.Namespace) -> Optional[int]:
    return 1 if args.deterministic else args.workers


def _read_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path) as file:
        try:
            data = json.load(file)
        except json.JSONDecodeError as err:
            raise FileFormatError(
                f"Config file {path} is not valid JSON: {err}"
            ) from err
    if not isinstance(data, dict):
        raise FileFormatError(f"Config file {path} must hold a JSON object")
    return data


def resolve_train_config(
    args: argparse.Namespace, base: Optional[TrainConfig] = None
) -> TrainConfig:
    """
    Training configuration of a run: defaults (or ``base``, e.g. from a resumed
    checkpoint), updated with the config file, updated with explicit flags.
    """
    options = base.to_dict() if base is not None else {}
    options.update(_read_config_file(args.config))
    for dest, name in _TRAIN_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            options[name] = value
    if args.deterministic:
        options["deterministic"] = True
    try:
        return TrainConfig.from_dict(options)
    except ValueError:
        # includes sklearn's InvalidParameterError, also a TypeError
        raise
    except (KeyError, TypeError, AttributeError) as err:
        raise FileFormatError(f"Invalid training options: {err!r}") from err


def _write_outputs(
    out_dir: Path, command: str, produced: Sequence[Path], **extra
) -> Path:
    outputs = sorted(Path(path).relative_to(out_dir).as_posix() for path in produced)
    path = out_dir / OUTPUTS_NAME
    with open(path, "w") as file:
        json.dump(
            {"command": command, "outputs": outputs, **extra},
            file,
            indent=2,
            sort_keys=True,
        )
        file.write("\n")
    return path


def _image_size(
    args: argparse.Namespace, dataset: Optional[LightFieldDataset]
) -> tuple[int, int]:
    width = args.width
    height = args.height
    if dataset is not None:
        width = width if width is not None else dataset.width
        height = height if height is not None else dataset.height
    width = width if width is not None else 64
    height = height if height is not None else 64
    return width, height


def cmd_generate(args: argparse.Namespace) -> str:
    """Generate a recipe dataset into ``--out``."""
    out_dir = Path(args.out)
    dataset = generate_recipe(
        args.recipe,
        image_w=args.width,
        image_h=args.height,
        grid_rows=args.grid_rows,
        grid_cols=args.grid_cols,
        n_jobs=_n_jobs(args),
        verbose=args.verbose,
    )
    produced = save_dataset(dataset, out_dir)
    _write_outputs(out_dir, "generate", produced, recipe=args.recipe)
    return (
        f"generated {args.recipe}: {dataset.num_views} views "
        f"{dataset.width}x{dataset.height}, z_uv={dataset.param.z_uv:g}, "
        f"{len(dataset.holdout_indices)} held out -> {out_dir}"
    )


def cmd_train(args: argparse.Namespace) -> str:
    """Train on ``--dataset``, writing checkpoints and a metrics log to ``--out``."""
    out_dir = Path(args.out)
    dataset = load_dataset(args.dataset)
    state = None
    base = None
    if args.resume is not None:
        state, base = load_checkpoint(args.resume)
    config = resolve_train_config(args, base)

    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "metrics.csv"
    config_path = out_dir / "train_config.json"
    with open(config_path, "w") as file:
        json.dump(config.to_dict(), file, indent=2, sort_keys=True)
        file.write("\n")

    state = train(
        dataset,
        config,
        state=state,
        log_path=log_path,
        checkpoint_dir=out_dir,
        verbose=args.verbose,
    )
    produced = [config_path, *sorted(out_dir.glob("*.ckpt"))]
    if log_path.exists():
        produced.append(log_path)
    _write_outputs(out_dir, "train", produced, seed=config.seed)
    return (
        f"trained {state.iteration} iterations, final loss {state.last_loss:.4e} "
        f"-> {out_dir / 'final.ckpt'}"
    )


def _render_cameras(
    args: argparse.Namespace, dataset: Optional[LightFieldDataset]
) -> list[Camera]:
    if dataset is not None:
        return [dataset.camera(int(view)) for view in dataset.split_indices(args.split)]
    if args.frames < 1:
        raise ValueError(f"--frames must be positive, got {args.frames}")
    start = args.start
    end = args.end if args.end is not None else args.start
    cameras = []
    for frame in range(args.frames):
        t = frame / (args.frames - 1) if args.frames > 1 else 0.0
        position = [a + t * (b - a) for a, b in zip(start, end)]
        cameras.append(
            Camera(position, target_depth=args.target_depth, extent=args.extent)
        )
    return cameras


def cmd_render(args: argparse.Namespace) -> str:
    """Render a camera path (or dataset cameras) from ``--checkpoint``."""
    out_dir = Path(args.out)
    model = load_model(args.checkpoint)
    dataset = load_dataset(args.dataset) if args.dataset is not None else None
    width, height = _image_size(args, dataset)
    cameras = _render_cameras(args, dataset)

    out_dir.mkdir(parents=True, exist_ok=True)
    produced = []
    evaluations = []
    for frame, camera in enumerate(cameras):
        result = render_image(
            model, camera, width, height, n_jobs=_n_jobs(args), verbose=args.verbose
        )
        path = out_dir / f"frame_{frame:03d}.png"
        write_image(path, result.image)
        produced.append(path)
        evaluations.append(result.evaluations)

    total = sum(evaluations)
    n_pixels = width * height * len(cameras)
    if args.count_evals:
        evals_path = out_dir / "evals.json"
        with open(evals_path, "w") as file:
            json.dump(
                {
                    "width": width,
                    "height": height,
                    "frames": evaluations,
                    "total": total,
                    "evals_per_pixel": total / n_pixels if n_pixels else 0.0,
                    "subdivided": model.subdivided,
                },
                file,
                indent=2,
                sort_keys=True,
            )
            file.write("\n")
        produced.append(evals_path)

    _write_outputs(out_dir, "render", produced)
    return f"rendered {len(cameras)} frames {width}x{height}, evals={total}"


def cmd_eval(args: argparse.Namespace) -> str:
    """Evaluate ``--checkpoint`` on a split of ``--dataset``."""
    out_dir = Path(args.out)
    model = load_model(args.checkpoint)
    dataset = load_dataset(args.dataset)
    report = evaluate(
        model, dataset, args.split, n_jobs=_n_jobs(args), verbose=args.verbose
    )
    produced = report.write(out_dir / "report")
    _write_outputs(out_dir, "eval", produced)
    return report.summary()


def cmd_epi(args: argparse.Namespace) -> str:
    """Slice an epipolar-plane image of ``--dataset`` or ``--checkpoint``."""
    out_dir = Path(args.out)
    dataset = load_dataset(args.dataset)
    if args.checkpoint is not None:
        source = load_model(args.checkpoint)
        name = "epi_model.png"
    else:
        source = dataset
        name = "epi_dataset.png"
    epi = epi_slice(
        source,
        args.camera_index,
        args.pixel_index,
        axis=args.axis,
        dataset=dataset,
        num_cameras=args.num_cameras,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    write_image(path, epi)
    _write_outputs(out_dir, "epi", [path])
    return f"{args.axis} EPI {epi.shape[1]}x{epi.shape[0]} -> {path}"


def cmd_embedviz(args: argparse.Namespace) -> str:
    """Write the first principal components of the ray embedding as an image."""
    out_dir = Path(args.out)
    model = load_model(args.checkpoint)
    dataset = None
    if args.dataset is not None:
        dataset = load_dataset(args.dataset)
        camera = dataset.camera(args.view)
    else:
        camera = Camera(args.camera)
    width, height = _image_size(args, dataset)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        image = embedding_pca_image(model, camera, width, height)
    for warning in caught:
        print(f"sklf: warning: {warning.message}", file=sys.stderr)

    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "embedding_pca.png"
    write_image(path, image)
    _write_outputs(out_dir, "embedviz", [path])
    return f"embedding PCA {width}x{height} -> {path}"


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "render": cmd_render,
    "eval": cmd_eval,
    "epi": cmd_epi,
    "embedviz": cmd_embedviz,
}


def _exit_code(err: Exception) -> int:
    # FileFormatError and NumericalError are ValueErrors, check them first
    if isinstance(err, FileFormatError):
        return EXIT_IO
    if isinstance(err, NumericalError):
        return EXIT_NUMERIC
    if isinstance(err, OSError):
        return EXIT_IO
    return EXIT_USAGE


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line interface.

    Parameters
    ----------
    argv : sequence of str, default=None
        Arguments without the program name, ``None`` uses ``sys.argv``.

    Returns
    -------
    exit_code : int
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return exit_.code if isinstance(exit_.code, int) else EXIT_USAGE

    try:
        summary = COMMANDS[args.command](args)
    except (ValueError, OSError) as err:
        print(f"sklf {args.command}: error: {err}", file=sys.stderr)
        return _exit_code(err)

    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
