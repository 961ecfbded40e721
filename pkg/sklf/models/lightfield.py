from dataclasses import dataclass, field, replace
from typing import Any, Optional, Union

import numpy as np

from sklf.encoding import PosEncConfig, encoded_dim
from sklf.exceptions import ShapeMismatchError
from sklf.geometry import TwoPlaneParam, VoxelGrid
from sklf.models.embedding import EmbeddingKind
from sklf.net import MlpParams, mlp_init


def _embedding_dims(
    kind: EmbeddingKind, embedding_pe: PosEncConfig, voxel_dim: int
) -> tuple[int, int]:
    return encoded_dim(4, embedding_pe) + voxel_dim, kind.output_dim


def _color_dims(
    kind: EmbeddingKind,
    ray_pe: PosEncConfig,
    latent_pe: PosEncConfig,
    voxel_dim: int,
    subdivided: bool,
) -> tuple[int, int]:
    if kind.kind == "none":
        input_dim = encoded_dim(4, ray_pe)
    else:
        input_dim = encoded_dim(kind.latent_dim, latent_pe)
    return input_dim + voxel_dim, 4 if subdivided else 3


@dataclass(frozen=True)
class LightFieldModel:
    """
    Neural light field: a color network, optionally preceded by a ray-space
    embedding network, and optionally split into a voxel grid of local light
    fields.

    Without a grid, a ray is mapped to its two-plane coordinates ``r`` and its
    color is ``F(gamma(z))``, where ``z`` is ``r`` itself (kind ``"none"``), a
    normalized feature vector (kind ``"feature"``) or ``A r + b`` with a
    per-ray affine map (kind ``"affine"``). The color network outputs RGB.

    With a grid, every voxel crossed by the ray re-parameterizes it locally. Both
    networks are shared by all voxels and additionally receive the encoded voxel
    center. The color network outputs RGB and opacity, and samples are
    over-composited front to back.

    Parameters
    ----------
    color_net : MlpParams
        Color network ``F``.

    embedding_net : MlpParams or None
        Embedding network ``E``, ``None`` for kind ``"none"``.

    embedding_kind : EmbeddingKind
        Embedding variant and latent dimension.

    ray_pe : PosEncConfig
        Encoding of ray coordinates fed to ``F`` for kind ``"none"``.

    latent_pe : PosEncConfig
        Encoding of the embedding fed to ``F``.

    voxel_pe : PosEncConfig
        Encoding of normalized voxel centers, used with a grid.

    embedding_pe : PosEncConfig
        Encoding of ray coordinates fed to ``E``. Zero bands with the raw input
        included means ``E`` sees raw coordinates.

    grid : VoxelGrid or None, default=None
        Subdivision of the scene.

    two_plane : TwoPlaneParam, default=TwoPlaneParam()
        Ray parameterization used without a grid.

    background : tuple of 3 floats, default=(0, 0, 0)
        Color of rays passing through all samples, or missing the grid.
    """

    color_net: MlpParams
    embedding_net: Optional[MlpParams]
    embedding_kind: EmbeddingKind
    ray_pe: PosEncConfig
    latent_pe: PosEncConfig
    voxel_pe: PosEncConfig
    embedding_pe: PosEncConfig = field(
        default_factory=lambda: PosEncConfig(0, include_input=True)
    )
    grid: Optional[VoxelGrid] = None
    two_plane: TwoPlaneParam = field(default_factory=TwoPlaneParam)
    background: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        background = tuple(float(c) for c in self.background)
        object.__setattr__(self, "background", background)
        kind = self.embedding_kind

        if kind.kind == "none":
            if self.embedding_net is not None:
                raise ShapeMismatchError("Embedding kind 'none' takes no embedding net")
        else:
            if self.embedding_net is None:
                raise ShapeMismatchError(
                    f"Embedding kind {kind.kind!r} requires an embedding net"
                )
            self._check_dims("embedding", self.embedding_net, *self.embedding_dims)

        self._check_dims("color", self.color_net, *self.color_dims)

    @staticmethod
    def _check_dims(name: str, net: MlpParams, input_dim: int, output_dim: int):
        if (net.input_dim, net.output_dim) != (input_dim, output_dim):
            raise ShapeMismatchError(
                f"The {name} network maps {net.input_dim} -> {net.output_dim} "
                f"values, expected {input_dim} -> {output_dim}"
            )

    @property
    def subdivided(self) -> bool:
        return self.grid is not None

    @property
    def voxel_feature_dim(self) -> int:
        return encoded_dim(3, self.voxel_pe) if self.subdivided else 0

    @property
    def embedding_dims(self) -> tuple[int, int]:
        return _embedding_dims(
            self.embedding_kind, self.embedding_pe, self.voxel_feature_dim
        )

    @property
    def color_dims(self) -> tuple[int, int]:
        return _color_dims(
            self.embedding_kind,
            self.ray_pe,
            self.latent_pe,
            self.voxel_feature_dim,
            self.subdivided,
        )

    @property
    def dtype(self) -> np.dtype:
        return self.color_net.dtype

    def networks(self) -> list[MlpParams]:
        """Trainable networks, color network first."""
        nets = [self.color_net]
        if self.embedding_net is not None:
            nets.append(self.embedding_net)
        return nets

    def with_networks(self, networks: list[MlpParams]) -> "LightFieldModel":
        """Copy with networks replaced, in :meth:`networks` order."""
        embedding_net = networks[1] if len(networks) > 1 else None
        return replace(self, color_net=networks[0], embedding_net=embedding_net)

    def with_progress(self, progress: float) -> "LightFieldModel":
        """
        Copy with the frequency easing position set for the ray, latent and
        embedding-input encodings. Voxel center encodings stay fully open.
        """
        return replace(
            self,
            ray_pe=self.ray_pe.with_progress(progress),
            latent_pe=self.latent_pe.with_progress(progress),
            embedding_pe=self.embedding_pe.with_progress(progress),
        )

    def astype(self, dtype) -> "LightFieldModel":
        return self.with_networks([net.astype(dtype) for net in self.networks()])

    def config(self) -> dict[str, Any]:
        """JSON-serializable description of everything but network weights."""
        return {
            "embedding_kind": self.embedding_kind.kind,
            "latent_dim": self.embedding_kind.latent_dim,
            "ray_pe": self.ray_pe.to_dict(),
            "latent_pe": self.latent_pe.to_dict(),
            "voxel_pe": self.voxel_pe.to_dict(),
            "embedding_pe": self.embedding_pe.to_dict(),
            "grid": self.grid.to_dict() if self.grid is not None else None,
            "two_plane": {"z_xy": self.two_plane.z_xy, "z_uv": self.two_plane.z_uv},
            "background": list(self.background),
            "color_skip_layer": self.color_net.skip_layer,
            "embedding_skip_layer": (
                self.embedding_net.skip_layer if self.embedding_net else None
            ),
        }

    def arrays(self) -> dict[str, np.ndarray]:
        """Named network arrays, for checkpoints."""
        out = {}
        named = (("color_net", self.color_net), ("embedding_net", self.embedding_net))
        for name, net in named:
            if net is None:
                continue
            for layer, (W, b) in enumerate(zip(net.weights, net.biases)):
                out[f"{name}/W{layer}"] = W
                out[f"{name}/b{layer}"] = b
        return out

    @classmethod
    def from_arrays(
        cls, config: dict[str, Any], arrays: dict[str, np.ndarray]
    ) -> "LightFieldModel":
        """Inverse of :meth:`config` and :meth:`arrays`."""

        def load_net(name: str, skip_layer: Optional[int]) -> Optional[MlpParams]:
            depth = sum(1 for key in arrays if key.startswith(f"{name}/W"))
            if depth == 0:
                return None
            weights = [np.array(arrays[f"{name}/W{i}"]) for i in range(depth)]
            biases = [np.array(arrays[f"{name}/b{i}"]) for i in range(depth)]
            return MlpParams(weights, biases, skip_layer)

        grid = config.get("grid")
        return cls(
            color_net=load_net("color_net", config["color_skip_layer"]),
            embedding_net=load_net("embedding_net", config["embedding_skip_layer"]),
            embedding_kind=EmbeddingKind(
                config["embedding_kind"], config["latent_dim"]
            ),
            ray_pe=PosEncConfig(**config["ray_pe"]),
            latent_pe=PosEncConfig(**config["latent_pe"]),
            voxel_pe=PosEncConfig(**config["voxel_pe"]),
            embedding_pe=PosEncConfig(**config["embedding_pe"]),
            grid=VoxelGrid(**grid) if grid is not None else None,
            two_plane=TwoPlaneParam(**config["two_plane"]),
            background=tuple(config["background"]),
        )


def build_model(
    embedding_kind: Union[str, EmbeddingKind] = "affine",
    latent_dim: int = 32,
    num_bands: Optional[int] = None,
    embedding_bands: int = 0,
    include_input: bool = True,
    width: int = 256,
    depth: int = 8,
    skip_layer: Optional[int] = 4,
    grid: Optional[VoxelGrid] = None,
    two_plane: Optional[TwoPlaneParam] = None,
    background=(0.0, 0.0, 0.0),
    seed: Union[int, np.random.Generator, None] = 0,
    dtype=np.float32,
) -> LightFieldModel:
    """
    Create a freshly initialized light field model.

    ``num_bands=None`` picks 10 frequency bands without subdivision and 8 with
    it. The same band count is used for ray, latent and voxel center encodings.
    Both networks share ``width``, ``depth`` and ``skip_layer``, and are
    initialized from one random generator, color network first.

    Examples
    --------
    >>> from sklf.models import build_model
    >>> model = build_model("feature", latent_dim=8, width=32, depth=2, skip_layer=1)
    >>> model.color_dims
    (168, 3)
    """
    if isinstance(embedding_kind, str):
        embedding_kind = EmbeddingKind(embedding_kind, latent_dim)
    if num_bands is None:
        num_bands = 8 if grid is not None else 10
    if two_plane is None:
        two_plane = TwoPlaneParam()

    rng = np.random.default_rng(seed)
    pe = PosEncConfig(num_bands, include_input=include_input)
    embedding_pe = PosEncConfig(embedding_bands, include_input=True)

    voxel_dim = encoded_dim(3, pe) if grid is not None else 0
    color_dims = _color_dims(embedding_kind, pe, pe, voxel_dim, grid is not None)
    color_net = mlp_init(*color_dims, width, depth, skip_layer, seed=rng, dtype=dtype)
    embedding_net = None
    if embedding_kind.kind != "none":
        embedding_dims = _embedding_dims(embedding_kind, embedding_pe, voxel_dim)
        embedding_net = mlp_init(
            *embedding_dims, width, depth, skip_layer, seed=rng, dtype=dtype
        )

    return LightFieldModel(
        color_net=color_net,
        embedding_net=embedding_net,
        embedding_kind=embedding_kind,
        ray_pe=pe,
        latent_pe=pe,
        voxel_pe=pe,
        embedding_pe=embedding_pe,
        grid=grid,
        two_plane=two_plane,
        background=tuple(background),
    )


