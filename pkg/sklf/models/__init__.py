"""Neural light field models, compositing and rendering."""

from .compositing import (
    VoxelSample,
    composite,
    composite_backward,
    composite_batch,
    composite_weights,
)
from .embedding import AffineOutput, EmbeddingKind
from .lightfield import LightFieldModel, build_model
from .pipeline import (
    affine_output,
    embed_affine,
    embed_feature,
    evaluate_samples,
    evaluate_samples_backward,
    forward_rays,
    lf_forward,
    lf_forward_local,
    lf_forward_local_batch,
    loss_and_gradients,
    trace_rays,
)
from .rendering import (
    Camera,
    RenderResult,
    embed_rays,
    render_image,
    render_ray,
    render_rays,
)
