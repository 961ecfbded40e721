"""Positional encoding with frequency easing."""

from .positional import (
    PosEncConfig,
    encoded_dim,
    posenc,
    posenc_backward,
    progress_at,
    window_weights,
)
