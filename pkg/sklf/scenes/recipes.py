"""
Desk-scale synthetic scenes used for experiments and tests.

All recipes share the geometry of a forward-facing capture: cameras on the plane
``z = -1`` spanning ``[-0.25, 0.25]^2`` and a pixel window ``[-1, 1]^2`` on the
plane ``z = 0``.
"""

from numbers import Integral
from typing import NamedTuple, Optional, Union

from sklearn.utils._param_validation import Interval, StrOptions, validate_params

from sklf.geometry import TwoPlaneParam
from sklf.scenes.analytic import AnalyticScene, Rectangle
from sklf.scenes.dataset import HoldoutRule, LightFieldDataset, generate_grid_dataset
from sklf.scenes.textures import CheckerTexture, ConstantTexture, SineGratingTexture

CAMERA_DEPTH = -1.0
CAMERA_EXTENT = 0.25
PIXEL_EXTENT = 1.0

# voxel grid box enclosing all recipe geometry in front of the cameras
GRID_BOX = ((-1.5, -1.5, -0.75), (1.5, 1.5, 0.75))


class Recipe(NamedTuple):
    name: str
    scene: AnalyticScene
    param: TwoPlaneParam
    grid_rows: int
    grid_cols: int
    holdout_rule: HoldoutRule
    description: str


def _plane_scene() -> AnalyticScene:
    return AnalyticScene(
        [
            Rectangle(
                depth=0.0,
                half_extent=(1.2, 1.2),
                texture=CheckerTexture(
                    cells=8, color_a=(0.9, 0.8, 0.2), color_b=(0.1, 0.2, 0.6)
                ),
            )
        ]
    )


def _occluder_scene() -> AnalyticScene:
    front = Rectangle(
        depth=-0.4,
        half_extent=(0.35, 0.35),
        texture=CheckerTexture(
            cells=4, color_a=(0.95, 0.95, 0.9), color_b=(0.8, 0.1, 0.1)
        ),
    )
    back = Rectangle(
        depth=0.3,
        half_extent=(1.5, 1.5),
        texture=SineGratingTexture(frequency=(3.0, 2.0)),
    )
    return AnalyticScene([front, back])


def _plane(offset: int) -> Recipe:
    return Recipe(
        name=f"plane{offset}",
        scene=_plane_scene(),
        param=TwoPlaneParam(z_xy=CAMERA_DEPTH, z_uv=float(offset)),
        grid_rows=5,
        grid_cols=5,
        holdout_rule=HoldoutRule("every_kth", k=4),
        description=(
            f"Checkered plane at z = 0, rays parameterized with pi^uv at z = {offset}"
        ),
    )


def _two_plane_occluder() -> Recipe:
    return Recipe(
        name="two-plane-occluder",
        scene=_occluder_scene(),
        param=TwoPlaneParam(z_xy=CAMERA_DEPTH, z_uv=0.0),
        grid_rows=5,
        grid_cols=5,
        holdout_rule=HoldoutRule("every_kth", k=8),
        description="Checkered square occluding a sine grating, 5x5 cameras",
    )


def _sparse_occluder() -> Recipe:
    return Recipe(
        name="sparse-occluder",
        scene=_occluder_scene(),
        param=TwoPlaneParam(z_xy=CAMERA_DEPTH, z_uv=0.0),
        grid_rows=3,
        grid_cols=3,
        holdout_rule=HoldoutRule("every_kth", k=2),
        description="Checkered square occluding a sine grating, sparse 3x3 cameras",
    )


def _constant() -> Recipe:
    scene = AnalyticScene(
        [Rectangle(depth=0.0, half_extent=(2.0, 2.0), texture=ConstantTexture())]
    )
    return Recipe(
        name="constant",
        scene=scene,
        param=TwoPlaneParam(z_xy=CAMERA_DEPTH, z_uv=0.0),
        grid_rows=5,
        grid_cols=5,
        holdout_rule=HoldoutRule("every_kth", k=8),
        description="Uniformly gray plane",
    )


RECIPES = {
    "plane0": lambda: _plane(0),
    "plane1": lambda: _plane(1),
    "plane3": lambda: _plane(3),
    "two-plane-occluder": _two_plane_occluder,
    "sparse-occluder": _sparse_occluder,
    "constant": _constant,
}


@validate_params(
    {"name": [StrOptions(set(RECIPES))]},
    prefer_skip_nested_validation=True,
)
def get_recipe(name: str) -> Recipe:
    """
    Scene, parameterization, camera grid and split of a named recipe.

    Recipes are:

    - ``"plane0"``, ``"plane1"``, ``"plane3"`` - a single checkered plane at
      ``z = 0``, with the plane ``pi^uv`` at ``z = 0, 1, 3`` respectively; the
      images are identical, only the ray coordinates differ
    - ``"two-plane-occluder"`` - a small checkered square in front of a sine
      grating, 5x5 cameras
    - ``"sparse-occluder"`` - the same scene seen by 3x3 cameras
    - ``"constant"`` - a uniformly gray plane

    Examples
    --------
    >>> from sklf.scenes import get_recipe
    >>> get_recipe("plane3").param.z_uv
    3.0
    """
    return RECIPES[name]()


@validate_params(
    {
        "name": [StrOptions(set(RECIPES))],
        "image_w": [Interval(Integral, 1, None, closed="left")],
        "image_h": [Interval(Integral, 1, None, closed="left")],
        "grid_rows": [Interval(Integral, 1, None, closed="left"), None],
        "grid_cols": [Interval(Integral, 1, None, closed="left"), None],
        "n_jobs": [Integral, None],
        "verbose": ["verbose", dict],
    },
    prefer_skip_nested_validation=True,
)
def generate_recipe(
    name: str,
    image_w: int = 64,
    image_h: int = 64,
    grid_rows: Optional[int] = None,
    grid_cols: Optional[int] = None,
    n_jobs: Optional[int] = None,
    verbose: Union[int, dict] = 0,
) -> LightFieldDataset:
    """
    Generate the dataset of a named recipe, see :func:`get_recipe`.

    Parameters
    ----------
    name : str
        Recipe name.

    image_w, image_h : int, default=64
        Image size in pixels.

    grid_rows, grid_cols : int, default=None
        Camera grid shape. ``None`` uses the grid of the recipe.

    n_jobs : int, default=None
        The number of jobs to run in parallel over views.

    verbose : int or dict, default=0
        Controls the verbosity when rendering views.
    """
    recipe = get_recipe(name)
    return generate_grid_dataset(
        recipe.scene,
        grid_rows=grid_rows or recipe.grid_rows,
        grid_cols=grid_cols or recipe.grid_cols,
        image_w=image_w,
        image_h=image_h,
        param=recipe.param,
        holdout_rule=recipe.holdout_rule,
        camera_extent=CAMERA_EXTENT,
        pixel_extent=PIXEL_EXTENT,
        pixel_depth=0.0,
        n_jobs=n_jobs,
        verbose=verbose,
    )
