import numpy as np
import pytest

from sklf.exceptions import ConstantEmbeddingWarning
from sklf.metrics import embedding_pca, embedding_pca_image, pca_to_rgb
from sklf.models import Camera, build_model


@pytest.fixture
def small_model():
    def make(kind: str):
        return build_model(
            kind, latent_dim=4, num_bands=2, width=8, depth=2, skip_layer=1
        )

    return make


def test_pca_of_a_line_uses_one_channel():
    t = np.linspace(-1, 1, 21)
    direction = np.array([1.0, -2.0, 0.5, 3.0])
    X = 0.3 + t[:, np.newaxis] * direction

    projections, pca = embedding_pca(X, n_components=3)
    rgb = pca_to_rgb(projections)

    assert projections.shape == (21, 3)
    assert pca.explained_variance_ratio_[0] == pytest.approx(1.0)
    assert rgb[:, 0].min() == pytest.approx(0.0)
    assert rgb[:, 0].max() == pytest.approx(1.0)
    assert np.allclose(rgb[:, 1:], 0.5)


def test_pca_signs_are_deterministic():
    X = np.random.default_rng(0).normal(size=(30, 5))
    projections, pca = embedding_pca(X)
    flipped_projections, flipped_pca = embedding_pca(-X)

    assert np.allclose(pca.components_, flipped_pca.components_)
    assert np.allclose(projections, -flipped_projections)

    largest = np.argmax(np.abs(pca.components_), axis=1)
    assert np.all(pca.components_[np.arange(3), largest] > 0)


def test_pca_component_count_is_reduced():
    projections, pca = embedding_pca(np.random.default_rng(0).normal(size=(5, 2)))
    assert projections.shape == (5, 2)
    assert pca.n_components == 2


def test_pca_to_rgb_fills_missing_channels():
    rgb = pca_to_rgb(np.array([[0.0], [2.0], [1.0]]))
    assert np.allclose(rgb, [[0.0, 0.5, 0.5], [1.0, 0.5, 0.5], [0.5, 0.5, 0.5]])


def test_invalid_embeddings():
    with pytest.raises(ValueError) as exc_info:
        embedding_pca(np.zeros(5))

    assert "non-empty 2D array" in str(exc_info)


@pytest.mark.parametrize("kind", ["feature", "affine"])
def test_embedding_image(small_model, kind):
    image = embedding_pca_image(small_model(kind), Camera(), width=6, height=5)
    assert image.shape == (5, 6, 3)
    assert image.min() >= 0.0
    assert image.max() <= 1.0
    # min-max normalization reaches both ends of the first component
    assert image[..., 0].min() == pytest.approx(0.0)
    assert image[..., 0].max() == pytest.approx(1.0)


def test_constant_embedding_warns(small_model):
    model = small_model("feature")
    net = model.embedding_net
    net.weights[-1][:] = 0
    net.biases[-1][:] = 1

    with pytest.warns(ConstantEmbeddingWarning):
        image = embedding_pca_image(model, Camera(), width=4, height=4)

    assert np.allclose(image, 0.5)


def test_embedding_image_needs_embedding(small_model):
    with pytest.raises(ValueError) as exc_info:
        embedding_pca_image(small_model("none"), Camera(), width=4, height=4)

    assert "Model has no embedding network" in str(exc_info)


def test_pca_reconstruction():
    X = np.random.default_rng(3).normal(size=(40, 3))
    projections, pca = embedding_pca(X, n_components=3)
    centered = X - X.mean(axis=0)
    assert np.allclose(projections @ pca.components_, centered, atol=1e-6)
