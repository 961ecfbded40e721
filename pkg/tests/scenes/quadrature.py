import numpy as np
import pytest

from sklf.geometry import Ray, TwoPlaneParam, to_two_plane
from sklf.scenes import (
    AnalyticScene,
    ConstantTexture,
    RadianceFieldOracle,
    Rectangle,
    analytic_lightfield,
    quadrature_render,
    scene_to_radiance_field,
)


def _homogeneous(sigma: float, color: tuple, t_far: float) -> RadianceFieldOracle:
    return RadianceFieldOracle(
        density=lambda points: np.full(len(points), sigma),
        emission=lambda points, dirs: np.tile(color, (len(points), 1)),
        t_near=0.0,
        t_far=t_far,
    )


def test_homogeneous_medium():
    oracle = _homogeneous(1.0, (1.0, 0.5, 0.0), t_far=2.0)
    ray = Ray([0, 0, 0], [0, 0, 1])
    background = np.array([0.0, 0.0, 1.0])

    color = quadrature_render(oracle, ray, num_samples=64, background=background)
    expected = (1 - np.exp(-2.0)) * np.array([1.0, 0.5, 0.0])
    expected += np.exp(-2.0) * background
    assert color.shape == (3,)
    assert np.allclose(color, expected)


def test_jittered_samples_agree_on_homogeneous_medium():
    oracle = _homogeneous(0.7, (0.2, 0.4, 0.6), t_far=1.5)
    rays = Ray(np.zeros((3, 3)), [[0, 0, 1], [1, 0, 1], [0, 1, 1]])

    fixed = quadrature_render(oracle, rays, num_samples=32)
    jittered = quadrature_render(
        oracle, rays, num_samples=32, rng=np.random.default_rng(0)
    )
    assert fixed.shape == (3, 3)
    assert np.allclose(fixed, jittered)


def test_matches_analytic_lightfield():
    param = TwoPlaneParam(z_xy=-1.0, z_uv=0.0)
    front = Rectangle(
        depth=0.0,
        half_extent=(0.5, 0.5),
        opacity=0.5,
        texture=ConstantTexture((1.0, 0.0, 0.0)),
    )
    back = Rectangle(
        depth=1.0, half_extent=(2.0, 2.0), texture=ConstantTexture((0.0, 0.0, 1.0))
    )
    scene = AnalyticScene([front, back], background=(0.0, 1.0, 0.0))

    origins = np.array([[0.0, 0.0, -1.0]] * 3)
    targets = np.array([[0.0, 0.0, 0.0], [0.8, 0.0, 0.0], [3.0, 0.0, 0.0]])
    rays = Ray(origins, targets - origins)

    oracle = scene_to_radiance_field(scene, param, thickness=0.02, t_far=3.0)
    numeric = quadrature_render(
        oracle, rays, num_samples=4096, background=scene.background
    )
    exact = analytic_lightfield(scene, to_two_plane(rays, param), param)
    assert np.allclose(numeric, exact, atol=0.03)


def test_negative_density():
    oracle = _homogeneous(-1.0, (1.0, 1.0, 1.0), t_far=1.0)
    with pytest.raises(ValueError) as exc_info:
        quadrature_render(oracle, Ray([0, 0, 0], [0, 0, 1]), num_samples=8)

    assert "Density must be non-negative" in str(exc_info)


def test_too_few_samples():
    oracle = _homogeneous(1.0, (1.0, 1.0, 1.0), t_far=1.0)
    with pytest.raises(ValueError) as exc_info:
        quadrature_render(oracle, Ray([0, 0, 0], [0, 0, 1]), num_samples=1)

    assert "num_samples must be at least 2" in str(exc_info)


def test_invalid_bounds():
    with pytest.raises(ValueError) as exc_info:
        _homogeneous(1.0, (1.0, 1.0, 1.0), t_far=0.0)

    assert "t_near must be smaller" in str(exc_info)
