"""reshade-forge: reshading-aware path tracer and dataset pipeline."""

from .camera import PinholeCamera, project, unproject
from .geometry import Hit, Ray
from .image_io import (
    HdrImage,
    LdrImage,
    read_mask_png,
    read_pfm,
    tonemap,
    write_mask_png,
    write_pfm,
)
from .scene import (
    EnvironmentLight,
    Material,
    Plane,
    Primitive,
    Quad,
    SceneDescription,
    Sphere,
    Texture,
    add_random_orbs,
    load_scene,
    parse_scene,
    randomize_materials,
    serialize_scene,
    validate_scene,
)
from .tracer import (
    RenderOutputs,
    ReshadeEstimate,
    estimate_radiance,
    estimate_reshaded,
    intersect,
    render,
)

__all__ = [
    "PinholeCamera", "project", "unproject",
    "Hit", "Ray",
    "HdrImage", "LdrImage", "read_mask_png", "read_pfm", "tonemap",
    "write_mask_png", "write_pfm",
    "EnvironmentLight", "Material", "Plane", "Primitive", "Quad",
    "SceneDescription", "Sphere", "Texture",
    "add_random_orbs", "load_scene", "parse_scene", "randomize_materials",
    "serialize_scene", "validate_scene",
    "RenderOutputs", "ReshadeEstimate", "estimate_radiance",
    "estimate_reshaded", "intersect", "render",
]
