"""Dataset generation: randomize, place cameras, render, and lay out files.

Each example gets its own directory with the four AOV files plus meta.json;
a manifest.json at the dataset root lists every meta record.  Generation is
a pure function of (scene files, config, master seed): reruns are
byte-identical and completed examples are skipped.

Novel offsets are stored in input-camera axes (right, up, -forward), which
makes the vector pose-free for the downstream network.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .camera import PinholeCamera
from .image_io import HdrImage, read_mask_png, read_pfm, write_mask_png, write_pfm
from .scene import (
    Plane,
    Quad,
    SceneDescription,
    Sphere,
    add_random_orbs,
    randomize_materials,
)
from .tracer import render

PAPER_PAIRS_PER_SCENE = 200
PAPER_RESOLUTION = (1280, 720)
PAPER_SPP = 8192

MAX_CAMERA_RETRIES = 16
MAX_EXAMPLE_RETRIES = 10

AOV_FILES = ("input.pfm", "reshaded.pfm", "depth.pfm", "validity.png")


@dataclass(frozen=True)
class GenConfig:
    """Desk-scale defaults; the paper's values are 200 pairs at 1280x720,
    8192 spp."""

    pairs_per_scene: int = 8
    width: int = 256
    height: int = 256
    spp: int = 256
    offset_radius: tuple[float, float] = (0.1, 0.3)
    orb_count: tuple[int, int] = (1, 4)
    seed: int = 0
    max_depth: int = 8
    fov_range_deg: tuple[float, float] = (40.0, 70.0)
    identity_offset: bool = False  # debug: force a zero novel offset
    workers: int | None = None

    def __post_init__(self):
        if self.pairs_per_scene < 0 or self.width < 1 or self.height < 1 or self.spp < 1:
            raise ValueError("pairs/resolution/spp must be positive")
        lo, hi = self.offset_radius
        if not 0.0 < lo <= hi:
            raise ValueError(f"offset radius range must satisfy 0 < lo <= hi, got {self.offset_radius}")
        if not 0 <= self.orb_count[0] <= self.orb_count[1]:
            raise ValueError("orb count range must satisfy 0 <= lo <= hi")


@dataclass
class DatasetExample:
    example_id: str
    scene_id: str
    input_path: str
    reshaded_path: str
    depth_path: str
    validity_path: str
    camera: PinholeCamera
    novel_offset: tuple[float, float, float]  # input-camera axes (right, up, -fwd)
    spp: int
    seed: int

    def meta(self) -> dict:
        return {
            "example_id": self.example_id,
            "scene_id": self.scene_id,
            "camera": self.camera.to_json(),
            "novel_offset": list(self.novel_offset),
            "spp": self.spp,
            "seed": self.seed,
        }

    @classmethod
    def from_meta(cls, meta: dict, directory: str) -> "DatasetExample":
        return cls(
            example_id=meta["example_id"],
            scene_id=meta["scene_id"],
            input_path=os.path.join(directory, "input.pfm"),
            reshaded_path=os.path.join(directory, "reshaded.pfm"),
            depth_path=os.path.join(directory, "depth.pfm"),
            validity_path=os.path.join(directory, "validity.png"),
            camera=PinholeCamera.from_json(meta["camera"]),
            novel_offset=tuple(float(c) for c in meta["novel_offset"]),
            spp=int(meta["spp"]),
            seed=int(meta["seed"]),
        )


def sample_novel_offset(rng: np.random.Generator, radius_range=(0.1, 0.3)) -> np.ndarray:
    """Uniform direction on the sphere, radius uniform in radius_range."""
    z = float(rng.uniform(-1.0, 1.0))
    phi = float(rng.uniform(0.0, 2.0 * math.pi))
    s = math.sqrt(max(0.0, 1.0 - z * z))
    direction = np.array([s * math.cos(phi), s * math.sin(phi), z])
    radius = float(rng.uniform(*radius_range))
    return direction * radius


def _point_inside_primitive(scene: SceneDescription, p: np.ndarray) -> bool:
    for prim in scene.primitives:
        s = prim.shape
        if isinstance(s, Sphere):
            if np.linalg.norm(p - np.asarray(s.center)) < s.radius:
                return True
    return False


def _primitive_centroid(prim) -> np.ndarray:
    s = prim.shape
    if isinstance(s, Sphere):
        return np.asarray(s.center, float)
    if isinstance(s, Quad):
        return np.asarray(s.corner, float) + 0.5 * (
            np.asarray(s.edge_u, float) + np.asarray(s.edge_v, float)
        )
    assert isinstance(s, Plane)
    return np.asarray(s.point, float)


def sample_input_camera(
    scene: SceneDescription,
    rng: np.random.Generator,
    width: int,
    height: int,
    fov_range_deg=(40.0, 70.0),
) -> PinholeCamera:
    """Position uniform in the scene's camera box (retrying when inside a
    primitive), aimed at a uniformly chosen primitive centroid."""
    if scene.camera_box is None:
        raise ValueError("scene has no camera placement box (camera_box)")
    lo = np.asarray(scene.camera_box[0], float)
    hi = np.asarray(scene.camera_box[1], float)
    for _ in range(MAX_CAMERA_RETRIES):
        pos = rng.uniform(lo, hi)
        target = _primitive_centroid(scene.primitives[int(rng.integers(len(scene.primitives)))])
        fov = math.radians(float(rng.uniform(*fov_range_deg)))
        if _point_inside_primitive(scene, pos):
            continue
        if np.linalg.norm(target - pos) < 1e-6:
            continue
        return PinholeCamera(
            position=tuple(pos),
            look_at=tuple(target),
            up=(0.0, 1.0, 0.0),
            vertical_fov=fov,
            width=width,
            height=height,
        )
    raise RuntimeError("could not place a camera outside all primitives")


def offset_to_world(camera: PinholeCamera, offset) -> np.ndarray:
    """Camera-axes offset (right, up, -forward) to a world-space position."""
    right, up, fwd = camera.basis()
    o = np.asarray(offset, float)
    return np.asarray(camera.position, float) + o[0] * right + o[1] * up - o[2] * fwd


def example_complete(directory: str) -> bool:
    return all(os.path.exists(os.path.join(directory, f)) for f in AOV_FILES + ("meta.json",))


def generate_example(
    scene: SceneDescription,
    cfg: GenConfig,
    rng: np.random.Generator,
    *,
    scene_id: str,
    example_id: str,
    out_dir: str,
) -> DatasetExample:
    """Randomize materials and orbs, place cameras, render, write files.
    Resamples (fresh randomness, max 10 tries) if no pixel is valid."""
    os.makedirs(out_dir, exist_ok=True)
    last_error = None
    for attempt in range(MAX_EXAMPLE_RETRIES):
        mat_seed = int(rng.integers(np.iinfo(np.int64).max))
        orb_seed = int(rng.integers(np.iinfo(np.int64).max))
        render_seed = int(rng.integers(np.iinfo(np.int64).max))
        varied = randomize_materials(scene, mat_seed)
        varied = add_random_orbs(varied, orb_seed, cfg.orb_count)
        try:
            camera = sample_input_camera(
                varied, rng, cfg.width, cfg.height, cfg.fov_range_deg
            )
        except RuntimeError as e:
            last_error = e
            continue
        if cfg.identity_offset:
            offset = np.zeros(3)
        else:
            offset = sample_novel_offset(rng, cfg.offset_radius)
        novel_world = offset_to_world(camera, offset)
        out = render(
            varied, camera, novel_world, cfg.spp, render_seed,
            max_depth=cfg.max_depth, workers=cfg.workers,
        )
        if not out.validity.any():
            last_error = RuntimeError(f"{example_id}: all pixels invalid (attempt {attempt})")
            continue
        example = DatasetExample(
            example_id=example_id,
            scene_id=scene_id,
            input_path=os.path.join(out_dir, "input.pfm"),
            reshaded_path=os.path.join(out_dir, "reshaded.pfm"),
            depth_path=os.path.join(out_dir, "depth.pfm"),
            validity_path=os.path.join(out_dir, "validity.png"),
            camera=camera,
            novel_offset=tuple(float(c) for c in offset),
            spp=cfg.spp,
            seed=render_seed,
        )
        write_pfm(HdrImage(out.input_hdr), example.input_path)
        write_pfm(HdrImage(out.reshaded_hdr), example.reshaded_path)
        write_pfm(HdrImage(out.depth), example.depth_path)
        write_mask_png(out.validity, example.validity_path)
        with open(os.path.join(out_dir, "meta.json"), "w", encoding="utf-8") as f:
            json.dump(example.meta(), f, indent=2, sort_keys=True)
        return example
    raise RuntimeError(f"example {example_id} failed after {MAX_EXAMPLE_RETRIES} attempts: {last_error}")


@dataclass
class DatasetSummary:
    manifest_path: str
    examples: list[DatasetExample] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)  # already-complete ids
    failures: dict[str, str] = field(default_factory=dict)  # example_id -> error


def generate_dataset(
    scenes: list[tuple[str, SceneDescription]], cfg: GenConfig, out_dir: str
) -> DatasetSummary:
    """Render pairs_per_scene examples per scene and write manifest.json.
    Existing complete examples are kept as-is (resumable)."""
    os.makedirs(out_dir, exist_ok=True)
    summary = DatasetSummary(manifest_path=os.path.join(out_dir, "manifest.json"))
    records = []
    for scene_index, (scene_id, scene) in enumerate(sorted(scenes, key=lambda kv: kv[0])):
        for pair in range(cfg.pairs_per_scene):
            example_id = f"{scene_id}-{pair:04d}"
            example_dir = os.path.join(out_dir, scene_id, f"pair_{pair:04d}")
            if example_complete(example_dir):
                with open(os.path.join(example_dir, "meta.json"), encoding="utf-8") as f:
                    meta = json.load(f)
                records.append(meta)
                summary.skipped.append(example_id)
                summary.examples.append(DatasetExample.from_meta(meta, example_dir))
                continue
            rng = np.random.default_rng([cfg.seed, scene_index, pair])
            try:
                example = generate_example(
                    scene, cfg, rng,
                    scene_id=scene_id, example_id=example_id, out_dir=example_dir,
                )
            except (RuntimeError, ValueError) as e:
                summary.failures[example_id] = str(e)
                continue
            records.append(example.meta())
            summary.examples.append(example)
    with open(summary.manifest_path, "w", encoding="utf-8") as f:
        json.dump(records, f, indent=2, sort_keys=True)
    return summary


def load_manifest(path: str) -> list[DatasetExample]:
    root = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as f:
        records = json.load(f)
    examples = []
    for meta in records:
        scene_id = meta["scene_id"]
        pair = meta["example_id"].rsplit("-", 1)[1]
        examples.append(
            DatasetExample.from_meta(meta, os.path.join(root, scene_id, f"pair_{pair}"))
        )
    return examples


@dataclass
class ExampleData:
    """In-memory AOVs of one example, ready for augmentation."""

    input_hdr: np.ndarray
    reshaded_hdr: np.ndarray
    depth: np.ndarray
    validity: np.ndarray
    novel_offset: np.ndarray


def load_example(example: DatasetExample) -> ExampleData:
    return ExampleData(
        input_hdr=read_pfm(example.input_path).data,
        reshaded_hdr=read_pfm(example.reshaded_path).data,
        depth=read_pfm(example.depth_path).data[:, :, 0],
        validity=read_mask_png(example.validity_path),
        novel_offset=np.asarray(example.novel_offset, float),
    )
