"""Rays, ray-space parameterizations and voxel grids."""

from .ndc import ndc_project_points, world_to_ndc
from .pluecker import PlueckerCoords, to_pluecker
from .rays import (
    PARALLEL_EPS,
    Ray,
    RayCoords4D,
    TwoPlaneParam,
    intersect_ray_plane,
    rays_from_two_plane,
    to_two_plane,
)
from .voxel_grid import (
    LocalRayCoords,
    VoxelGrid,
    VoxelTraversal,
    localize,
    localize_batch,
    traverse_voxels,
    voxels_intersected,
    voxels_intersected_brute_force,
)
