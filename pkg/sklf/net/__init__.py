"""Fully connected networks with analytic gradients, and their optimizer."""

from .checkpoint import read_container, write_container
from .mlp import ForwardCache, MlpParams, mlp_backward, mlp_forward, mlp_init
from .optim import (
    AdamState,
    adam_step,
    clip_by_global_norm,
    exponential_lr,
    global_norm,
)
