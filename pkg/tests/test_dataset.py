import json
import os

import numpy as np
import pytest

import reshade_forge.dataset as dataset_mod
from reshade_forge.dataset import (
    DatasetExample,
    GenConfig,
    generate_dataset,
    generate_example,
    load_example,
    load_manifest,
    offset_to_world,
    sample_input_camera,
    sample_novel_offset,
)
from reshade_forge.image_io import read_pfm
from reshade_forge.scene import load_scene

TINY = GenConfig(pairs_per_scene=2, width=24, height=18, spp=4, orb_count=(1, 2), seed=9)


def test_sample_novel_offset_norm_range(rng):
    for _ in range(500):
        v = sample_novel_offset(rng)
        assert 0.1 - 1e-12 <= np.linalg.norm(v) <= 0.3 + 1e-12


def test_sample_novel_offset_deterministic():
    a = sample_novel_offset(np.random.default_rng(4))
    b = sample_novel_offset(np.random.default_rng(4))
    assert np.array_equal(a, b)


def test_sample_novel_offset_direction_symmetry():
    rng = np.random.default_rng(0)
    dirs = np.array([sample_novel_offset(rng) for _ in range(100_000)])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    assert np.abs(dirs.mean(axis=0)).max() < 0.01


def test_sample_input_camera_inside_box(box_scene, rng):
    lo = np.array(box_scene.camera_box[0])
    hi = np.array(box_scene.camera_box[1])
    for _ in range(200):
        cam = sample_input_camera(box_scene, rng, 32, 32)
        pos = np.asarray(cam.position)
        assert (pos >= lo - 1e-12).all() and (pos <= hi + 1e-12).all()
        assert np.radians(40.0) - 1e-9 <= cam.vertical_fov <= np.radians(70.0) + 1e-9


def test_sample_input_camera_degenerate_box(box_scene, rng):
    from dataclasses import replace

    corner = ((0.2, 1.0, 0.3), (0.2, 1.0, 0.3))
    scene = replace(box_scene, camera_box=corner)
    cam = sample_input_camera(scene, rng, 8, 8)
    assert cam.position == pytest.approx(corner[0], abs=1e-12)


def test_sample_input_camera_requires_box(furnace_scene, rng):
    with pytest.raises(ValueError, match="camera_box"):
        sample_input_camera(furnace_scene, rng, 8, 8)


def test_sample_input_camera_deterministic(box_scene):
    a = sample_input_camera(box_scene, np.random.default_rng(5), 16, 16)
    b = sample_input_camera(box_scene, np.random.default_rng(5), 16, 16)
    assert a == b


def test_offset_to_world_camera_axes(box_scene, rng):
    cam = sample_input_camera(box_scene, rng, 16, 16)
    right, up, fwd = cam.basis()
    p = offset_to_world(cam, (0.1, -0.2, 0.3))
    expected = np.asarray(cam.position) + 0.1 * right - 0.2 * up - 0.3 * fwd
    assert p == pytest.approx(expected, abs=1e-12)


def test_generate_example_files_and_meta_roundtrip(box_scene, tmp_path):
    out_dir = str(tmp_path / "ex")
    ex = generate_example(
        box_scene, TINY, np.random.default_rng(1),
        scene_id="box", example_id="box-0000", out_dir=out_dir,
    )
    for path in (ex.input_path, ex.reshaded_path, ex.depth_path, ex.validity_path):
        assert os.path.exists(path)
    with open(os.path.join(out_dir, "meta.json")) as f:
        meta = json.load(f)
    assert DatasetExample.from_meta(meta, out_dir) == ex
    assert 0.1 <= np.linalg.norm(ex.novel_offset) <= 0.3
    data = load_example(ex)
    assert data.input_hdr.shape == (18, 24, 3)
    assert data.depth.shape == (18, 24)
    assert data.validity.dtype == bool


def test_generate_example_identity_flag(box_scene, tmp_path):
    from dataclasses import replace

    cfg = replace(TINY, identity_offset=True)
    ex = generate_example(
        box_scene, cfg, np.random.default_rng(2),
        scene_id="box", example_id="box-0000", out_dir=str(tmp_path / "ex"),
    )
    assert ex.novel_offset == (0.0, 0.0, 0.0)
    data = load_example(ex)
    assert np.array_equal(data.input_hdr, data.reshaded_hdr)
    assert data.validity.all()


def test_generate_example_retries_on_all_invalid(box_scene, tmp_path, monkeypatch):
    calls = {"n": 0}
    real_render = dataset_mod.render

    def flaky_render(*args, **kwargs):
        out = real_render(*args, **kwargs)
        calls["n"] += 1
        if calls["n"] == 1:
            out.validity[:] = False
        return out

    monkeypatch.setattr(dataset_mod, "render", flaky_render)
    ex = generate_example(
        box_scene, TINY, np.random.default_rng(3),
        scene_id="box", example_id="box-0000", out_dir=str(tmp_path / "ex"),
    )
    assert calls["n"] == 2
    assert load_example(ex).validity.any()


def test_generate_example_gives_up_after_max_retries(box_scene, tmp_path, monkeypatch):
    real_render = dataset_mod.render

    def dead_render(*args, **kwargs):
        out = real_render(*args, **kwargs)
        out.validity[:] = False
        return out

    monkeypatch.setattr(dataset_mod, "render", dead_render)
    with pytest.raises(RuntimeError, match="failed after"):
        generate_example(
            box_scene, TINY, np.random.default_rng(3),
            scene_id="box", example_id="box-0000", out_dir=str(tmp_path / "ex"),
        )


def _dataset_scenes(scenes_dir):
    return [
        ("cornell", load_scene(os.path.join(scenes_dir, "cornell.json"))),
        ("env_spheres", load_scene(os.path.join(scenes_dir, "env_spheres.json"))),
    ]


def test_generate_dataset_manifest_counts(scenes_dir, tmp_path):
    out = str(tmp_path / "ds")
    summary = generate_dataset(_dataset_scenes(scenes_dir), TINY, out)
    assert not summary.failures
    assert len(summary.examples) == 4  # 2 scenes x 2 pairs
    with open(summary.manifest_path) as f:
        manifest = json.load(f)
    assert len(manifest) == 4
    loaded = load_manifest(summary.manifest_path)
    assert [e.example_id for e in loaded] == [m["example_id"] for m in manifest]
    for e in loaded:
        assert os.path.exists(e.input_path)


def test_generate_dataset_empty_scenes(tmp_path):
    summary = generate_dataset([], TINY, str(tmp_path / "ds"))
    assert summary.examples == [] and not summary.failures
    with open(summary.manifest_path) as f:
        assert json.load(f) == []


def test_generate_dataset_resume_regenerates_only_missing(scenes_dir, tmp_path):
    out = str(tmp_path / "ds")
    scenes = _dataset_scenes(scenes_dir)
    generate_dataset(scenes, TINY, out)
    victim = os.path.join(out, "cornell", "pair_0001", "input.pfm")
    before = {}
    for root, _, files in os.walk(out):
        for f in files:
            p = os.path.join(root, f)
            before[p] = os.path.getmtime(p)
    os.remove(victim)
    summary = generate_dataset(scenes, TINY, out)
    assert len(summary.skipped) == 3
    assert os.path.exists(victim)
    for p, mtime in before.items():
        if "pair_0001" not in p or "cornell" not in p:
            if p.endswith("manifest.json"):
                continue
            assert os.path.getmtime(p) == mtime, f"{p} was rewritten"


def test_generate_dataset_rerun_byte_identical(scenes_dir, tmp_path):
    scenes = _dataset_scenes(scenes_dir)
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    generate_dataset(scenes, TINY, out_a)
    generate_dataset(scenes, TINY, out_b)
    files_a = sorted(
        os.path.relpath(os.path.join(r, f), out_a)
        for r, _, fs in os.walk(out_a) for f in fs
    )
    files_b = sorted(
        os.path.relpath(os.path.join(r, f), out_b)
        for r, _, fs in os.walk(out_b) for f in fs
    )
    assert files_a == files_b
    for rel in files_a:
        with open(os.path.join(out_a, rel), "rb") as fa, open(os.path.join(out_b, rel), "rb") as fb:
            assert fa.read() == fb.read(), f"{rel} differs"


def test_dataset_depth_pfm_preserves_infinity(scenes_dir, tmp_path):
    scenes = [("env_spheres", load_scene(os.path.join(scenes_dir, "env_spheres.json")))]
    summary = generate_dataset(scenes, TINY, str(tmp_path / "ds"))
    depth = read_pfm(summary.examples[0].depth_path).data
    assert np.isinf(depth).any()  # sky pixels
    assert not np.isnan(depth).any()
