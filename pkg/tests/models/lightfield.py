import numpy as np
import pytest

from sklf.exceptions import ShapeMismatchError
from sklf.geometry import TwoPlaneParam
from sklf.models import LightFieldModel, build_model, lf_forward


def test_build_model_dims():
    model = build_model("feature", latent_dim=8, width=32, depth=2, skip_layer=1)
    assert model.color_dims == (168, 3)
    assert model.embedding_dims == (4, 8)
    assert len(model.networks()) == 2
    assert model.dtype == np.float32


def test_build_model_without_embedding():
    model = build_model("none", num_bands=10, width=16, depth=2, skip_layer=None)
    assert model.embedding_net is None
    assert model.color_dims == (4 + 2 * 4 * 10, 3)
    assert len(model.networks()) == 1


def test_build_model_subdivided(grid):
    model = build_model(
        "affine", latent_dim=4, width=16, depth=2, skip_layer=None, grid=grid
    )
    voxel_dim = 3 + 2 * 3 * 8
    assert model.subdivided
    assert model.ray_pe.num_bands == 8
    assert model.color_dims == (4 + 2 * 4 * 8 + voxel_dim, 4)
    assert model.embedding_dims == (4 + voxel_dim, 20)


def test_build_model_reproducible():
    first = build_model("affine", width=16, depth=2, skip_layer=None, seed=3)
    second = build_model("affine", width=16, depth=2, skip_layer=None, seed=3)
    for a, b in zip(first.arrays().values(), second.arrays().values()):
        assert np.array_equal(a, b)


def test_model_rejects_mismatched_networks():
    model = build_model("feature", latent_dim=8, width=16, depth=2, skip_layer=None)
    other = build_model("feature", latent_dim=4, width=16, depth=2, skip_layer=None)
    with pytest.raises(ShapeMismatchError) as exc_info:
        model.with_networks([model.color_net, other.embedding_net])

    assert "embedding network maps" in str(exc_info)


def test_model_none_kind_rejects_embedding_net():
    model = build_model("none", width=16, depth=2, skip_layer=None)
    with pytest.raises(ShapeMismatchError) as exc_info:
        LightFieldModel(
            color_net=model.color_net,
            embedding_net=model.color_net,
            embedding_kind=model.embedding_kind,
            ray_pe=model.ray_pe,
            latent_pe=model.latent_pe,
            voxel_pe=model.voxel_pe,
        )

    assert "takes no embedding net" in str(exc_info)


def test_with_progress_keeps_voxel_encoding_open(grid):
    model = build_model("feature", width=16, depth=2, skip_layer=None, grid=grid)
    eased = model.with_progress(1.5)
    assert eased.ray_pe.progress == 1.5
    assert eased.latent_pe.progress == 1.5
    assert eased.voxel_pe.progress == eased.voxel_pe.num_bands
    assert eased.color_net is model.color_net


def test_config_and_arrays_restore_model(grid):
    model = build_model(
        "affine",
        latent_dim=4,
        width=16,
        depth=3,
        skip_layer=2,
        two_plane=TwoPlaneParam(z_xy=-1.0, z_uv=3.0),
        background=(1.0, 1.0, 1.0),
    ).with_progress(2.5)
    restored = LightFieldModel.from_arrays(model.config(), model.arrays())

    assert restored.config() == model.config()
    r = np.random.default_rng(0).uniform(-1, 1, size=(8, 4))
    assert np.array_equal(lf_forward(model, r), lf_forward(restored, r))

    subdivided = build_model("none", width=16, depth=2, skip_layer=None, grid=grid)
    restored = LightFieldModel.from_arrays(subdivided.config(), subdivided.arrays())
    assert restored.grid == grid


def test_astype():
    model = build_model("feature", width=16, depth=2, skip_layer=None)
    converted = model.astype(np.float64)
    assert converted.dtype == np.float64
    assert converted.embedding_net.dtype == np.float64
