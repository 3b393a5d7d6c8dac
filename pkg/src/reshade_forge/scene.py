"""Scene description, its JSON text format, and dataset randomization.

Scenes are immutable after construction and safe to share across render
workers.  The text format is a plain UTF-8 JSON document (grammar in
docs/scene_format.md); scenes should be authored near unit scale.
"""

from __future__ import annotations

import colorsys
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

Vec3 = tuple[float, float, float]

MATERIAL_KINDS = ("lambertian", "mirror", "ggx_conductor")
TEXTURE_KINDS = ("checker", "value-noise")

ROUGHNESS_MIN = 0.01
ROUGHNESS_MAX = 1.0


class SceneFormatError(ValueError):
    """Syntax error in a scene document (carries line/column when known)."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SceneValidationError(ValueError):
    """Semantically invalid scene."""


def _vec3(v, what: str) -> Vec3:
    try:
        x, y, z = (float(c) for c in v)
    except (TypeError, ValueError):
        raise SceneValidationError(f"{what} must be a 3-vector, got {v!r}") from None
    for c in (x, y, z):
        if not math.isfinite(c):
            raise SceneValidationError(f"{what} has non-finite component {c}")
    return (x, y, z)


def _rgb01(v, what: str) -> Vec3:
    rgb = _vec3(v, what)
    if min(rgb) < 0.0 or max(rgb) > 1.0:
        raise SceneValidationError(f"{what} components must lie in [0, 1], got {rgb}")
    return rgb


@dataclass(frozen=True)
class Texture:
    kind: str  # "checker" | "value-noise"
    scale: float
    color_a: Vec3
    color_b: Vec3

    def __post_init__(self):
        if self.kind not in TEXTURE_KINDS:
            raise SceneValidationError(f"unknown texture kind {self.kind!r}")
        if not math.isfinite(self.scale) or self.scale <= 0.0:
            raise SceneValidationError(f"texture scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class Material:
    kind: str
    color: Vec3  # albedo (lambertian) or reflectance (mirror / ggx)
    roughness: float = ROUGHNESS_MIN  # ggx only; stored clamped to [0.01, 1]
    texture: Texture | None = None

    def __post_init__(self):
        if self.kind not in MATERIAL_KINDS:
            raise SceneValidationError(f"unknown material kind {self.kind!r}")
        object.__setattr__(self, "color", _rgb01(self.color, f"{self.kind} color"))
        r = float(self.roughness)
        if not math.isfinite(r):
            raise SceneValidationError("roughness must be finite")
        # roughness is meaningful for ggx only; pin it elsewhere so equality
        # and the canonical serialized form are well defined
        if self.kind != "ggx_conductor":
            r = ROUGHNESS_MIN
        object.__setattr__(self, "roughness", min(max(r, ROUGHNESS_MIN), ROUGHNESS_MAX))


@dataclass(frozen=True)
class Sphere:
    center: Vec3
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "sphere center"))
        if not math.isfinite(self.radius) or self.radius <= 0.0:
            raise SceneValidationError(f"sphere radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Quad:
    """Parallelogram spanned by edge_u and edge_v from corner."""

    corner: Vec3
    edge_u: Vec3
    edge_v: Vec3

    def __post_init__(self):
        object.__setattr__(self, "corner", _vec3(self.corner, "quad corner"))
        object.__setattr__(self, "edge_u", _vec3(self.edge_u, "quad edge_u"))
        object.__setattr__(self, "edge_v", _vec3(self.edge_v, "quad edge_v"))
        n = np.cross(self.edge_u, self.edge_v)
        if np.linalg.norm(n) < 1e-12:
            raise SceneValidationError("quad edges must be linearly independent")


@dataclass(frozen=True)
class Plane:
    point: Vec3
    normal: Vec3

    def __post_init__(self):
        object.__setattr__(self, "point", _vec3(self.point, "plane point"))
        object.__setattr__(self, "normal", _vec3(self.normal, "plane normal"))
        n = np.linalg.norm(self.normal)
        if abs(n - 1.0) > 1e-6:
            raise SceneValidationError(f"plane normal must be unit length, |n|={n}")


Shape = Sphere | Quad | Plane


@dataclass(frozen=True)
class Primitive:
    shape: Shape
    material_index: int
    emission: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "emission", _vec3(self.emission, "emission"))
        if min(self.emission) < 0.0:
            raise SceneValidationError(f"emission must be >= 0, got {self.emission}")
        if self.material_index < 0:
            raise SceneValidationError("material_index must be non-negative")

    @property
    def is_emissive(self) -> bool:
        return max(self.emission) > 0.0


@dataclass(frozen=True)
class EnvironmentLight:
    kind: str = "constant"  # "constant" | "latlong"
    radiance: Vec3 = (0.0, 0.0, 0.0)
    image_path: str | None = None
    rotation: float = 0.0
    image: np.ndarray | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in ("constant", "latlong"):
            raise SceneValidationError(f"unknown environment kind {self.kind!r}")
        object.__setattr__(self, "radiance", _vec3(self.radiance, "environment radiance"))
        if min(self.radiance) < 0.0:
            raise SceneValidationError("environment radiance must be >= 0")
        if self.kind == "latlong":
            if self.image is None:
                raise SceneValidationError("latlong environment needs a loaded image")
            img = np.asarray(self.image, dtype=np.float64)
            if img.ndim != 3 or img.shape[2] != 3:
                raise SceneValidationError("latlong image must be HxWx3")
            if not np.isfinite(img).all() or img.min() < 0.0:
                raise SceneValidationError("latlong image must be finite and >= 0")
            object.__setattr__(self, "image", img)

    @property
    def is_black(self) -> bool:
        if self.kind == "constant":
            return max(self.radiance) <= 0.0
        return float(self.image.max()) <= 0.0


@dataclass(frozen=True)
class SceneDescription:
    primitives: tuple[Primitive, ...]
    materials: tuple[Material, ...]
    environment: EnvironmentLight
    camera_box: tuple[Vec3, Vec3] | None = None  # (min, max) camera placement box

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        object.__setattr__(self, "materials", tuple(self.materials))
        if self.camera_box is not None:
            lo = _vec3(self.camera_box[0], "camera_box min")
            hi = _vec3(self.camera_box[1], "camera_box max")
            if any(l > h for l, h in zip(lo, hi)):
                raise SceneValidationError("camera_box min must be <= max")
            object.__setattr__(self, "camera_box", (lo, hi))

    def emitter_indices(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.primitives) if p.is_emissive)


def validate_scene(scene: SceneDescription) -> SceneDescription:
    """Check cross-object invariants; field-level ones hold by construction."""
    for i, prim in enumerate(scene.primitives):
        if prim.material_index >= len(scene.materials):
            raise SceneValidationError(
                f"primitive {i} references material {prim.material_index}, "
                f"but only {len(scene.materials)} materials exist"
            )
    if not scene.emitter_indices() and scene.environment.is_black:
        raise SceneValidationError("scene has no light source (no emitter, black environment)")
    return scene


def bounding_box(scene: SceneDescription) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounds of the finite geometry (planes excluded),
    unioned with the camera box; unit box around origin as a last resort."""
    points = []
    for prim in scene.primitives:
        s = prim.shape
        if isinstance(s, Sphere):
            c, r = np.asarray(s.center), s.radius
            points.extend([c - r, c + r])
        elif isinstance(s, Quad):
            c = np.asarray(s.corner)
            eu, ev = np.asarray(s.edge_u), np.asarray(s.edge_v)
            points.extend([c, c + eu, c + ev, c + eu + ev])
    if scene.camera_box is not None:
        points.extend([np.asarray(scene.camera_box[0]), np.asarray(scene.camera_box[1])])
    if not points:
        return np.full(3, -1.0), np.full(3, 1.0)
    pts = np.stack(points)
    return pts.min(axis=0), pts.max(axis=0)


# ---------------------------------------------------------------------------
# text format


def _reject_nonfinite(token: str):
    raise SceneFormatError(f"non-finite numeric literal {token!r} in scene document")


def _parse_texture(obj) -> Texture:
    if not isinstance(obj, dict):
        raise SceneValidationError(f"texture must be an object, got {obj!r}")
    colors = obj.get("colors")
    if not isinstance(colors, (list, tuple)) or len(colors) != 2:
        raise SceneValidationError("texture needs 'colors': [rgb, rgb]")
    return Texture(
        kind=obj.get("kind", ""),
        scale=float(obj.get("scale", 1.0)),
        color_a=_rgb01(colors[0], "texture color"),
        color_b=_rgb01(colors[1], "texture color"),
    )


def _parse_material(obj) -> Material:
    kind = obj.get("kind")
    if kind not in MATERIAL_KINDS:
        raise SceneValidationError(f"unknown material kind {kind!r}")
    color_key = "albedo" if kind == "lambertian" else "reflectance"
    if color_key not in obj:
        raise SceneValidationError(f"{kind} material needs {color_key!r}")
    texture = _parse_texture(obj["texture"]) if obj.get("texture") is not None else None
    return Material(
        kind=kind,
        color=_rgb01(obj[color_key], color_key),
        roughness=float(obj.get("roughness", ROUGHNESS_MIN)),
        texture=texture,
    )


def _parse_primitive(obj) -> Primitive:
    shape_kind = obj.get("shape")
    if shape_kind == "sphere":
        shape = Sphere(center=obj["center"], radius=float(obj["radius"]))
    elif shape_kind == "quad":
        shape = Quad(corner=obj["corner"], edge_u=obj["edge_u"], edge_v=obj["edge_v"])
    elif shape_kind == "plane":
        shape = Plane(point=obj["point"], normal=obj["normal"])
    else:
        raise SceneValidationError(f"unknown shape kind {shape_kind!r}")
    return Primitive(
        shape=shape,
        material_index=int(obj.get("material", -1)),
        emission=_vec3(obj.get("emission", (0.0, 0.0, 0.0)), "emission"),
    )


def _parse_environment(obj, base_dir) -> EnvironmentLight:
    if obj is None:
        return EnvironmentLight()
    kind = obj.get("kind", "constant")
    if kind == "constant":
        return EnvironmentLight(kind="constant", radiance=obj.get("radiance", (0, 0, 0)))
    if kind == "latlong":
        from .image_io import read_pfm  # local import: avoid cycle at module load

        rel = obj.get("image")
        if not rel:
            raise SceneValidationError("latlong environment needs an 'image' path")
        path = rel if os.path.isabs(rel) else os.path.join(base_dir or ".", rel)
        img = read_pfm(path).data.astype(np.float64)
        return EnvironmentLight(
            kind="latlong",
            image_path=rel,
            rotation=float(obj.get("rotation", 0.0)),
            image=img,
        )
    raise SceneValidationError(f"unknown environment kind {kind!r}")


def parse_scene(text: str, base_dir: str | None = None) -> SceneDescription:
    """Parse and validate a scene document.  base_dir resolves relative
    environment-image paths."""
    try:
        doc = json.loads(text, parse_constant=_reject_nonfinite)
    except json.JSONDecodeError as e:
        raise SceneFormatError(e.msg, line=e.lineno, column=e.colno) from None
    if not isinstance(doc, dict):
        raise SceneFormatError("scene document must be a JSON object")
    materials = tuple(_parse_material(m) for m in doc.get("materials", []))
    primitives = tuple(_parse_primitive(p) for p in doc.get("primitives", []))
    box = None
    if doc.get("camera_box") is not None:
        box = (tuple(doc["camera_box"]["min"]), tuple(doc["camera_box"]["max"]))
    scene = SceneDescription(
        primitives=primitives,
        materials=materials,
        environment=_parse_environment(doc.get("environment"), base_dir),
        camera_box=box,
    )
    return validate_scene(scene)


def load_scene(path) -> SceneDescription:
    with open(path, "r", encoding="utf-8") as f:
        return parse_scene(f.read(), base_dir=os.path.dirname(os.path.abspath(path)))


def serialize_scene(scene: SceneDescription) -> str:
    """Canonical text form; parse(serialize(s)) == s for any valid scene."""

    def mat(m: Material) -> dict:
        out: dict = {"kind": m.kind}
        out["albedo" if m.kind == "lambertian" else "reflectance"] = list(m.color)
        if m.kind == "ggx_conductor":
            out["roughness"] = m.roughness
        if m.texture is not None:
            out["texture"] = {
                "kind": m.texture.kind,
                "scale": m.texture.scale,
                "colors": [list(m.texture.color_a), list(m.texture.color_b)],
            }
        return out

    def prim(p: Primitive) -> dict:
        s = p.shape
        if isinstance(s, Sphere):
            out = {"shape": "sphere", "center": list(s.center), "radius": s.radius}
        elif isinstance(s, Quad):
            out = {
                "shape": "quad",
                "corner": list(s.corner),
                "edge_u": list(s.edge_u),
                "edge_v": list(s.edge_v),
            }
        else:
            out = {"shape": "plane", "point": list(s.point), "normal": list(s.normal)}
        out["material"] = p.material_index
        if p.is_emissive:
            out["emission"] = list(p.emission)
        return out

    env = scene.environment
    if env.kind == "constant":
        env_obj = {"kind": "constant", "radiance": list(env.radiance)}
    else:
        env_obj = {"kind": "latlong", "image": env.image_path, "rotation": env.rotation}
    doc = {
        "materials": [mat(m) for m in scene.materials],
        "primitives": [prim(p) for p in scene.primitives],
        "environment": env_obj,
    }
    if scene.camera_box is not None:
        doc["camera_box"] = {
            "min": list(scene.camera_box[0]),
            "max": list(scene.camera_box[1]),
        }
    return json.dumps(doc, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# dataset randomization

_KIND_WEIGHTS = (("lambertian", 0.50), ("ggx_conductor", 0.35), ("mirror", 0.15))
_TEXTURE_PROB = 0.5
_TEXTURE_SCALE_RANGE = (0.5, 4.0)
_COLOR_RANGE = (0.05, 0.95)
_ORB_RADIUS_FRAC = (0.02, 0.10)
_ORB_LUMINANCE = (5.0, 50.0)


def _draw_color(rng) -> Vec3:
    lo, hi = _COLOR_RANGE
    return tuple(float(c) for c in rng.uniform(lo, hi, size=3))


def _draw_material(rng) -> Material:
    u = rng.uniform()
    acc = 0.0
    kind = _KIND_WEIGHTS[-1][0]
    for name, w in _KIND_WEIGHTS:
        acc += w
        if u < acc:
            kind = name
            break
    color = _draw_color(rng)
    roughness = float(np.exp(rng.uniform(np.log(ROUGHNESS_MIN), np.log(ROUGHNESS_MAX))))
    texture = None
    if rng.uniform() < _TEXTURE_PROB:
        texture = Texture(
            kind=TEXTURE_KINDS[int(rng.uniform() < 0.5)],
            scale=float(rng.uniform(*_TEXTURE_SCALE_RANGE)),
            color_a=_draw_color(rng),
            color_b=_draw_color(rng),
        )
    return Material(kind=kind, color=color, roughness=roughness, texture=texture)


def randomize_materials(scene: SceneDescription, seed: int) -> SceneDescription:
    """Redraw every material not referenced by an emissive primitive.
    Geometry and emission are untouched; pure function of (scene, seed)."""
    rng = np.random.default_rng(seed)
    protected = {p.material_index for p in scene.primitives if p.is_emissive}
    materials = tuple(
        m if i in protected else _draw_material(rng) for i, m in enumerate(scene.materials)
    )
    return replace(scene, materials=materials)


def add_random_orbs(
    scene: SceneDescription, seed: int, count_range: tuple[int, int]
) -> SceneDescription:
    """Append k ~ uniform{lo..hi} emissive spheres at random positions inside
    the scene bounds; hue uniform, luminance uniform in [5, 50]."""
    lo, hi = count_range
    if not 0 <= lo <= hi:
        raise ValueError(f"count_range must satisfy 0 <= lo <= hi, got {count_range}")
    rng = np.random.default_rng(seed)
    k = int(rng.integers(lo, hi + 1))
    if k == 0:
        return scene
    bmin, bmax = bounding_box(scene)
    bounding_radius = 0.5 * float(np.linalg.norm(bmax - bmin))
    orb_material = Material(kind="lambertian", color=(0.0, 0.0, 0.0))
    orb_mat_index = len(scene.materials)
    orbs = []
    for _ in range(k):
        center = rng.uniform(bmin, bmax)
        radius = float(rng.uniform(*_ORB_RADIUS_FRAC)) * bounding_radius
        rgb = np.array(colorsys.hsv_to_rgb(float(rng.uniform()), 1.0, 1.0))
        lum = float(rgb @ (0.2126, 0.7152, 0.0722))
        target = float(rng.uniform(*_ORB_LUMINANCE))
        emission = tuple(float(c) for c in rgb * (target / max(lum, 1e-6)))
        orbs.append(
            Primitive(
                shape=Sphere(center=tuple(float(c) for c in center), radius=radius),
                material_index=orb_mat_index,
                emission=emission,
            )
        )
    return replace(
        scene,
        primitives=scene.primitives + tuple(orbs),
        materials=scene.materials + (orb_material,),
    )
