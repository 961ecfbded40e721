from functools import partial

import numpy as np
import pytest

from sklf.geometry import Ray, VoxelGrid
from sklf.models import build_model


@pytest.fixture
def make_model():
    """Small float64 models, fast enough for finite difference checks."""
    return partial(
        build_model,
        latent_dim=4,
        num_bands=2,
        width=8,
        depth=2,
        skip_layer=1,
        dtype=np.float64,
    )


@pytest.fixture
def grid() -> VoxelGrid:
    return VoxelGrid(2, box_min=(-1, -1, -1), box_max=(1, 1, 1))


@pytest.fixture
def camera_rays() -> Ray:
    """Forward-facing rays from the default camera plane z = -1."""
    rng = np.random.default_rng(0)
    origins = np.column_stack(
        [rng.uniform(-0.3, 0.3, 6), rng.uniform(-0.3, 0.3, 6), np.full(6, -1.0)]
    )
    targets = np.column_stack(
        [rng.uniform(-0.8, 0.8, 6), rng.uniform(-0.8, 0.8, 6), np.zeros(6)]
    )
    return Ray(origins, targets - origins)


@pytest.fixture
def grid_rays() -> Ray:
    """Rays crossing the [-1, 1]^3 box from z = -3."""
    rng = np.random.default_rng(1)
    origins = np.column_stack(
        [rng.uniform(-0.4, 0.4, 5), rng.uniform(-0.4, 0.4, 5), np.full(5, -3.0)]
    )
    targets = np.column_stack(
        [rng.uniform(-0.7, 0.7, 5), rng.uniform(-0.7, 0.7, 5), np.full(5, 1.0)]
    )
    return Ray(origins, targets - origins)
