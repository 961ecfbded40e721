import numpy as np
import pytest

from sklf.geometry import Ray, to_pluecker


@pytest.fixture
def random_rays() -> Ray:
    rng = np.random.default_rng(0)
    return Ray(rng.normal(size=(1000, 3)), rng.normal(size=(1000, 3)))


def test_to_pluecker_known_value():
    coords = to_pluecker(Ray([1, 0, 0], [0, 0, 1]))
    assert np.allclose(coords.moment, [0.0, -1.0, 0.0])
    assert coords.as_array().shape == (6,)


def test_to_pluecker_invariant_to_sliding(random_rays):
    t = np.random.default_rng(1).uniform(-5, 5, size=len(random_rays))
    first = to_pluecker(random_rays).as_array()
    second = to_pluecker(random_rays.slide(t)).as_array()
    assert np.max(np.abs(first - second)) <= 1e-9


def test_to_pluecker_moment_orthogonal_to_direction(random_rays):
    coords = to_pluecker(random_rays)
    dots = np.sum(coords.direction * coords.moment, axis=1)
    assert np.max(np.abs(dots)) <= 1e-9
