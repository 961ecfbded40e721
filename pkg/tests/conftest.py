import numpy as np
import pytest
from _pytest.fixtures import FixtureRequest

from sklf.geometry import TwoPlaneParam
from sklf.scenes import HoldoutRule, LightFieldDataset, generate_recipe
from sklf.training import TrainConfig


def pytest_addoption(parser) -> None:
    parser.addoption("--train_iters", action="store", default="2000")


@pytest.fixture(scope="session")
def train_iters(request: FixtureRequest) -> int:
    """Iteration budget of slow end-to-end training runs."""
    return int(request.config.getoption("--train_iters"))


@pytest.fixture(scope="session")
def occluder_dataset() -> LightFieldDataset:
    """
    Small capture of the occluder scene, 3x3 views of 12x12 pixels, large enough
    for SSIM. View 7 is held out.
    """
    return generate_recipe(
        "two-plane-occluder", image_w=12, image_h=12, grid_rows=3, grid_cols=3
    )


@pytest.fixture(scope="session")
def single_view_dataset() -> LightFieldDataset:
    """One 12x12 view of a uniformly colored scene, used for training only."""
    image = np.broadcast_to(np.array([0.8, 0.4, 0.2]), (1, 12, 12, 3))
    return LightFieldDataset(
        images=image,
        positions=np.array([[0.0, 0.0, -1.0]]),
        param=TwoPlaneParam(),
        grid_rows=1,
        grid_cols=1,
        holdout=np.zeros(1, dtype=bool),
        holdout_rule=HoldoutRule("none"),
    )


@pytest.fixture
def tiny_config() -> TrainConfig:
    """Architecture and budget small enough for unit tests."""
    return TrainConfig(
        embedding_kind="affine",
        latent_dim=4,
        num_bands=2,
        width=16,
        depth=2,
        skip_layer=1,
        batch_size=64,
        total_iters=4,
        log_every=2,
        grad_chunk_size=32,
        deterministic=True,
    )
