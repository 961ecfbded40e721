"""Analytic scenes, ground truth renderers and light field datasets."""

from .analytic import AnalyticScene, Rectangle, analytic_lightfield, plane_hit
from .dataset import (
    HoldoutRule,
    LightFieldDataset,
    camera_grid,
    generate_grid_dataset,
    load_dataset,
    read_manifest,
    reparameterize_dataset,
    save_dataset,
    write_manifest,
)
from .image_io import quantize, read_image, write_image
from .quadrature import RadianceFieldOracle, quadrature_render, scene_to_radiance_field
from .recipes import GRID_BOX, RECIPES, Recipe, generate_recipe, get_recipe
from .textures import (
    CheckerTexture,
    ConstantTexture,
    ImageTexture,
    SineGratingTexture,
    Texture,
    texture_from_dict,
)
