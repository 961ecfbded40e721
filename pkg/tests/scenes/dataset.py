import json

import numpy as np
import pytest

from sklf.exceptions import (
    FileFormatError,
    MissingFieldError,
    OutOfRangeError,
    SchemaVersionMismatchError,
)
from sklf.geometry import TwoPlaneParam, to_two_plane
from sklf.scenes import (
    AnalyticScene,
    CheckerTexture,
    HoldoutRule,
    LightFieldDataset,
    Rectangle,
    analytic_lightfield,
    camera_grid,
    generate_grid_dataset,
    load_dataset,
    read_manifest,
    reparameterize_dataset,
    save_dataset,
    write_image,
)


@pytest.fixture(scope="module")
def scene() -> AnalyticScene:
    return AnalyticScene(
        [
            Rectangle(
                depth=0.0, half_extent=(0.8, 0.8), texture=CheckerTexture(cells=4)
            )
        ],
        background=(0.2, 0.3, 0.4),
    )


@pytest.fixture(scope="module")
def dataset(scene) -> LightFieldDataset:
    return generate_grid_dataset(
        scene,
        grid_rows=3,
        grid_cols=3,
        image_w=8,
        image_h=6,
        holdout_rule=HoldoutRule("every_kth", k=4),
    )


def test_holdout_rules():
    every_kth = HoldoutRule("every_kth", k=4).holdout_mask(3, 3)
    assert np.flatnonzero(every_kth).tolist() == [3, 7]
    stride = HoldoutRule("grid_stride", k=2).holdout_mask(3, 3)
    assert np.flatnonzero(~stride).tolist() == [0, 2, 6, 8]
    assert not HoldoutRule("none").holdout_mask(3, 3).any()


def test_invalid_holdout_rules():
    with pytest.raises(ValueError) as exc_info:
        HoldoutRule("random")
    assert "Unknown holdout rule" in str(exc_info)

    with pytest.raises(ValueError) as exc_info:
        HoldoutRule("every_kth", k=0)
    assert "must be positive" in str(exc_info)


def test_camera_grid():
    positions = camera_grid(2, 3, extent=0.25, depth=-1.0)
    assert positions.shape == (6, 3)
    assert np.allclose(positions[0], [-0.25, 0.25, -1.0])
    assert np.allclose(positions[2], [0.25, 0.25, -1.0])
    assert np.allclose(positions[5], [0.25, -0.25, -1.0])

    single = camera_grid(1, 1, extent=0.25, depth=-1.0)
    assert np.allclose(single, [[0.0, 0.0, -1.0]])


def test_generated_dataset(dataset):
    assert dataset.images.shape == (9, 6, 8, 3)
    assert (dataset.num_views, dataset.height, dataset.width) == (9, 6, 8)
    assert dataset.holdout_indices.tolist() == [3, 7]
    assert len(dataset.train_indices) == 7
    assert np.allclose(dataset.images * 255, np.round(dataset.images * 255))


def test_pixels_are_colors_of_their_rays(dataset, scene):
    rays, colors = dataset.pixels("holdout")
    assert len(rays) == 2 * 6 * 8
    assert colors.shape == (2 * 6 * 8, 3)

    coords = to_two_plane(rays, dataset.param)
    expected = analytic_lightfield(scene, coords, dataset.param)
    assert np.allclose(colors, expected, atol=0.5 / 255 + 1e-12)


def test_parallel_generation_is_identical(scene, dataset):
    parallel = generate_grid_dataset(
        scene,
        grid_rows=3,
        grid_cols=3,
        image_w=8,
        image_h=6,
        holdout_rule=HoldoutRule("every_kth", k=4),
        n_jobs=2,
    )
    assert np.array_equal(parallel.images, dataset.images)


def test_empty_split(scene):
    dataset = generate_grid_dataset(
        scene, 1, 2, image_w=4, image_h=4, holdout_rule=HoldoutRule("none")
    )
    rays, colors = dataset.pixels("holdout")
    assert len(rays) == 0
    assert colors.shape == (0, 3)


def test_split_and_camera_errors(dataset):
    with pytest.raises(ValueError) as exc_info:
        dataset.split_indices("validation")
    assert "Unknown split" in str(exc_info)

    with pytest.raises(OutOfRangeError) as exc_info:
        dataset.camera(9)
    assert "View index must be in [0, 9)" in str(exc_info)


def test_invalid_dataset_shapes():
    with pytest.raises(ValueError) as exc_info:
        LightFieldDataset(
            images=np.zeros((3, 2, 2, 3)),
            positions=np.zeros((3, 3)),
            param=TwoPlaneParam(),
            grid_rows=2,
            grid_cols=2,
            holdout=np.zeros(3, dtype=bool),
        )
    assert "camera grid" in str(exc_info)


def test_ray_coords(dataset):
    coords = dataset.ray_coords(4)
    assert coords.shape == (6 * 8, 4)
    # the central camera sits at the origin of the camera plane
    assert np.allclose(coords[:, :2], 0.0)


def test_reparameterize_dataset(dataset):
    moved = reparameterize_dataset(dataset, 3.0)
    assert moved.param == TwoPlaneParam(z_xy=-1.0, z_uv=3.0)
    assert np.array_equal(moved.images, dataset.images)

    old = dataset.ray_coords(0)
    new = moved.ray_coords(0)
    assert np.allclose(new[:, :2], old[:, :2])
    assert np.allclose(new[:, 2:], old[:, :2] + (old[:, 2:] - old[:, :2]) * 4.0)


def test_save_load(tmp_path, dataset):
    paths = save_dataset(dataset, tmp_path / "data")
    assert len(paths) == 10
    assert paths[-1].name == "manifest.json"

    loaded = load_dataset(tmp_path / "data")
    assert np.array_equal(loaded.images, dataset.images)
    assert np.allclose(loaded.positions, dataset.positions)
    assert loaded.param == dataset.param
    assert loaded.holdout.tolist() == dataset.holdout.tolist()
    assert loaded.holdout_rule == dataset.holdout_rule
    assert loaded.scene == dataset.scene
    assert (loaded.grid_rows, loaded.grid_cols) == (3, 3)
    assert loaded.camera_extent == dataset.camera_extent

    from_manifest = load_dataset(tmp_path / "data" / "manifest.json")
    assert np.array_equal(from_manifest.images, dataset.images)


def _write_minimal(tmp_path, manifest: dict) -> None:
    write_image(tmp_path / "view.png", np.full((4, 5, 3), 0.5))
    with open(tmp_path / "manifest.json", "w") as file:
        json.dump(manifest, file)


def test_minimal_manifest(tmp_path):
    _write_minimal(
        tmp_path,
        {
            "schema_version": 1,
            "param": {"z_xy": -1.0, "z_uv": 1.0},
            "images": ["view.png"],
        },
    )
    dataset = read_manifest(tmp_path / "manifest.json")
    assert dataset.images.shape == (1, 4, 5, 3)
    assert np.allclose(dataset.positions, [[0.0, 0.0, -1.0]])
    assert dataset.train_indices.tolist() == [0]
    assert dataset.scene is None


@pytest.mark.parametrize("missing", ["schema_version", "param", "images"])
def test_missing_manifest_fields(tmp_path, missing):
    manifest = {
        "schema_version": 1,
        "param": {"z_xy": -1.0, "z_uv": 0.0},
        "images": ["view.png"],
    }
    del manifest[missing]
    _write_minimal(tmp_path, manifest)

    with pytest.raises(MissingFieldError) as exc_info:
        read_manifest(tmp_path / "manifest.json")

    assert "missing in manifest" in str(exc_info)


def test_missing_param_field(tmp_path):
    _write_minimal(
        tmp_path,
        {"schema_version": 1, "param": {"z_xy": -1.0}, "images": ["view.png"]},
    )
    with pytest.raises(MissingFieldError) as exc_info:
        read_manifest(tmp_path / "manifest.json")

    assert "missing in param" in str(exc_info)


@pytest.mark.parametrize(
    "changes",
    [
        {"grid": ["rows", 2]},
        {"param": {"z_xy": [-1.0], "z_uv": 0.0}},
        {"split": {"rule": {"kind": "every_kth", "stride": 8}}},
    ],
)
def test_malformed_manifest_fields(tmp_path, changes):
    manifest = {
        "schema_version": 1,
        "param": {"z_xy": -1.0, "z_uv": 0.0},
        "images": ["view.png"],
        **changes,
    }
    _write_minimal(tmp_path, manifest)

    with pytest.raises(FileFormatError) as exc_info:
        read_manifest(tmp_path / "manifest.json")

    assert "is malformed" in str(exc_info)


def test_schema_version_mismatch(tmp_path):
    _write_minimal(
        tmp_path,
        {
            "schema_version": 2,
            "param": {"z_xy": -1.0, "z_uv": 0.0},
            "images": ["view.png"],
        },
    )
    with pytest.raises(SchemaVersionMismatchError) as exc_info:
        read_manifest(tmp_path / "manifest.json")

    assert "schema version 2 is not supported" in str(exc_info)


def test_invalid_json(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("{not json")
    with pytest.raises(FileFormatError) as exc_info:
        read_manifest(path)

    assert "is not valid JSON" in str(exc_info)


def test_declared_size_mismatch(tmp_path):
    _write_minimal(
        tmp_path,
        {
            "schema_version": 1,
            "param": {"z_xy": -1.0, "z_uv": 0.0},
            "image": {"width": 6, "height": 4},
            "images": ["view.png"],
        },
    )
    with pytest.raises(FileFormatError) as exc_info:
        read_manifest(tmp_path / "manifest.json")

    assert "declares image width 6" in str(exc_info)


def test_holdout_out_of_range(tmp_path):
    _write_minimal(
        tmp_path,
        {
            "schema_version": 1,
            "param": {"z_xy": -1.0, "z_uv": 0.0},
            "split": {"holdout": [3]},
            "images": ["view.png"],
        },
    )
    with pytest.raises(FileFormatError) as exc_info:
        read_manifest(tmp_path / "manifest.json")

    assert "out of range" in str(exc_info)
