"""
Procedural and image-backed textures of scene rectangles.

Textures are evaluated in rectangle-normalized coordinates ``(a, b)``, where
``[-1, 1]^2`` covers the rectangle, ``a`` grows with x and ``b`` with y. They
return RGB values in ``[0, 1]``.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np


class Texture(ABC):
    """Base class for textures."""

    @abstractmethod
    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """RGB of shape ``a.shape + (3,)``."""

    @abstractmethod
    def to_dict(self) -> dict:
        """JSON-serializable description, inverse of :func:`texture_from_dict`."""


def _color(value) -> tuple:
    color = tuple(float(c) for c in value)
    if len(color) != 3 or not all(0 <= c <= 1 for c in color):
        raise ValueError(f"Colors must be RGB triples in [0, 1], got {value}")
    return color


@dataclass(frozen=True)
class ConstantTexture(Texture):
    color: tuple = (0.5, 0.5, 0.5)

    def __post_init__(self):
        object.__setattr__(self, "color", _color(self.color))

    def __call__(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        return np.broadcast_to(np.array(self.color), a.shape + (3,)).copy()

    def to_dict(self) -> dict:
        return {"type": "constant", "color": list(self.color)}


@dataclass(frozen=True)
class CheckerTexture(Texture):
    """
    Checkerboard with ``cells x cells`` squares over the rectangle.

    Examples
    --------
    >>> from sklf.scenes import CheckerTexture
    >>> texture = CheckerTexture(cells=2, color_a=(1, 1, 1), color_b=(0, 0, 0))
    >>> texture(-0.5, -0.5)
    array([1., 1., 1.])
    """

    cells: int = 8
    color_a: tuple = (0.9, 0.9, 0.9)
    color_b: tuple = (0.1, 0.1, 0.1)

    def __post_init__(self):
        if self.cells < 1:
            raise ValueError(f"cells must be positive, got {self.cells}")
        object.__setattr__(self, "color_a", _color(self.color_a))
        object.__setattr__(self, "color_b", _color(self.color_b))

    def __call__(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        size = 2.0 / self.cells
        parity = (np.floor((a + 1) / size) + np.floor((b + 1) / size)) % 2
        return np.where(
            parity[..., np.newaxis] == 0, np.array(self.color_a), np.array(self.color_b)
        )

    def to_dict(self) -> dict:
        return {
            "type": "checker",
            "cells": self.cells,
            "color_a": list(self.color_a),
            "color_b": list(self.color_b),
        }


@dataclass(frozen=True)
class SineGratingTexture(Texture):
    """
    Band-limited sinusoidal grating blending two colors.

    The blend weight is ``(1 + sin(pi * (fa * a + fb * b) + phase)) / 2``, so
    ``frequency`` counts full periods over the rectangle side of length 2.
    """

    frequency: tuple = (2.0, 1.0)
    phase: float = 0.0
    color_a: tuple = (0.9, 0.2, 0.1)
    color_b: tuple = (0.1, 0.3, 0.9)

    def __post_init__(self):
        object.__setattr__(self, "frequency", tuple(float(f) for f in self.frequency))
        object.__setattr__(self, "color_a", _color(self.color_a))
        object.__setattr__(self, "color_b", _color(self.color_b))

    def __call__(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        fa, fb = self.frequency
        w = (1 + np.sin(np.pi * (fa * a + fb * b) + self.phase)) / 2
        w = w[..., np.newaxis]
        return (1 - w) * np.array(self.color_a) + w * np.array(self.color_b)

    def to_dict(self) -> dict:
        return {
            "type": "sine",
            "frequency": list(self.frequency),
            "phase": self.phase,
            "color_a": list(self.color_a),
            "color_b": list(self.color_b),
        }


class ImageTexture(Texture):
    """
    Texture sampled bilinearly from an RGB image stretched over the rectangle,
    with row 0 at the top. Samples outside the image are clamped to the border.
    """

    def __init__(self, image: np.ndarray):
        image = np.asarray(image, dtype=np.float64)
        if image.ndim != 3 or image.shape[2] != 3:
            raise ValueError(
                f"Texture image must have shape (h, w, 3), got {image.shape}"
            )
        self.image = image

    def __call__(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        height, width, _ = self.image.shape

        # continuous pixel coordinates, pixel centers at integers
        col = np.clip((a + 1) / 2 * width - 0.5, 0, width - 1)
        row = np.clip((1 - b) / 2 * height - 0.5, 0, height - 1)
        c0 = np.floor(col).astype(int)
        r0 = np.floor(row).astype(int)
        c1 = np.minimum(c0 + 1, width - 1)
        r1 = np.minimum(r0 + 1, height - 1)
        wc = (col - c0)[..., np.newaxis]
        wr = (row - r0)[..., np.newaxis]

        top = (1 - wc) * self.image[r0, c0] + wc * self.image[r0, c1]
        bottom = (1 - wc) * self.image[r1, c0] + wc * self.image[r1, c1]
        return (1 - wr) * top + wr * bottom

    def to_dict(self) -> dict:
        return {"type": "image", "pixels": self.image.tolist()}


def texture_from_dict(data: dict) -> Texture:
    """Texture described by :meth:`Texture.to_dict` output."""
    data = dict(data)
    kind = data.pop("type")
    if kind == "constant":
        return ConstantTexture(**data)
    if kind == "checker":
        return CheckerTexture(**data)
    if kind == "sine":
        return SineGratingTexture(**data)
    if kind == "image":
        return ImageTexture(np.array(data["pixels"]))
    raise ValueError(f"Unknown texture type {kind!r}")
