"""forge: command-line front end.

Subcommands: validate, render, dataset, encode, metrics, warp.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys

import numpy as np

from .camera import PinholeCamera
from .dataset import GenConfig, generate_dataset, offset_to_world
from .image_io import HdrImage, read_mask_png, read_pfm, write_mask_png, write_pfm
from .relocation import CameraPair, forward_warp
from .scene import SceneFormatError, SceneValidationError, load_scene
from .signal_prep import frequency_encode, depth_to_disparity, masked_l1, psnr
from .tracer import render


def _parse_vec3(text: str) -> np.ndarray:
    parts = [float(c) for c in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected 'x,y,z', got {text!r}")
    return np.array(parts)


def _parse_res(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None


def _load_camera(path: str, resolution=None) -> PinholeCamera:
    with open(path, encoding="utf-8") as f:
        obj = json.load(f)
    if resolution is not None:
        obj["width"], obj["height"] = resolution
    return PinholeCamera.from_json(obj)


def cmd_validate(args) -> int:
    try:
        scene = load_scene(args.scene)
    except (SceneFormatError, SceneValidationError, OSError) as e:
        print(f"INVALID: {e}")
        return 1
    print(
        f"OK: {len(scene.primitives)} primitives, {len(scene.materials)} materials, "
        f"{len(scene.emitter_indices())} emitters, environment {scene.environment.kind}"
    )
    return 0


def cmd_render(args) -> int:
    scene = load_scene(args.scene)
    camera = _load_camera(args.camera, args.res)
    novel_world = offset_to_world(camera, args.novel)
    out = render(
        scene, camera, novel_world, args.spp, args.seed,
        max_depth=args.max_depth, workers=args.workers,
    )
    os.makedirs(args.out, exist_ok=True)
    write_pfm(HdrImage(out.input_hdr), os.path.join(args.out, "input.pfm"))
    write_pfm(HdrImage(out.reshaded_hdr), os.path.join(args.out, "reshaded.pfm"))
    write_pfm(HdrImage(out.depth), os.path.join(args.out, "depth.pfm"))
    write_mask_png(out.validity, os.path.join(args.out, "validity.png"))
    meta = {
        "camera": camera.to_json(),
        "novel_offset": [float(c) for c in args.novel],
        "spp": args.spp,
        "seed": args.seed,
    }
    with open(os.path.join(args.out, "meta.json"), "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    print(f"wrote 4 AOVs + meta.json to {args.out}")
    return 0


def cmd_dataset(args) -> int:
    paths = sorted(glob.glob(os.path.join(args.scenes, "*.json")))
    if not paths:
        print(f"no scene files in {args.scenes}", file=sys.stderr)
        return 1
    scenes = [(os.path.splitext(os.path.basename(p))[0], load_scene(p)) for p in paths]
    cfg = GenConfig(
        pairs_per_scene=args.pairs,
        width=args.res[0],
        height=args.res[1],
        spp=args.spp,
        offset_radius=(args.radius_min, args.radius_max),
        orb_count=(args.orbs_min, args.orbs_max),
        seed=args.seed,
        identity_offset=args.identity_offset,
        workers=args.workers,
    )
    summary = generate_dataset(scenes, cfg, args.out)
    print(
        f"manifest: {summary.manifest_path} "
        f"({len(summary.examples)} examples, {len(summary.skipped)} reused)"
    )
    if summary.failures:
        print("FAILED examples:", file=sys.stderr)
        for example_id, err in sorted(summary.failures.items()):
            print(f"  {example_id}: {err}", file=sys.stderr)
        return 1
    return 0


def cmd_encode(args) -> int:
    depth = read_pfm(args.depth).data[:, :, 0]
    enc = frequency_encode(depth_to_disparity(depth)).astype(np.float32)
    h, w, c = enc.shape
    # planar single-channel PFM: the 11 channel planes stacked vertically
    planes = enc.transpose(2, 0, 1).reshape(c * h, w)
    write_pfm(HdrImage(planes), args.out)
    print(f"wrote {c}-plane encoding ({c * h}x{w} Pf) to {args.out}")
    return 0


def cmd_metrics(args) -> int:
    a = read_pfm(args.a).data
    b = read_pfm(args.b).data
    mask = read_mask_png(args.mask) if args.mask else np.ones(a.shape[:2], bool)
    print(json.dumps({"psnr": psnr(a, b), "masked_l1": masked_l1(a, b, mask)}))
    return 0


def cmd_warp(args) -> int:
    image = read_pfm(args.image).data
    depth = read_pfm(args.depth).data[:, :, 0]
    with open(args.pose, encoding="utf-8") as f:
        pose = json.load(f)
    pair = CameraPair(
        input=PinholeCamera.from_json(pose["input"]),
        novel=PinholeCamera.from_json(pose["novel"]),
    )
    result = forward_warp(image, depth, pair, fill=args.fill)
    os.makedirs(args.out, exist_ok=True)
    write_pfm(HdrImage(result.warped), os.path.join(args.out, "warped.pfm"))
    write_mask_png(~result.holes, os.path.join(args.out, "coverage.png"))
    print(f"wrote warped.pfm + coverage.png to {args.out} "
          f"({int(result.holes.sum())} hole pixels)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a scene file")
    p.add_argument("scene")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="render the four AOVs of one view pair")
    p.add_argument("--scene", required=True)
    p.add_argument("--camera", required=True, help="camera JSON file")
    p.add_argument("--novel", type=_parse_vec3, default=np.zeros(3),
                   help="novel offset 'dx,dy,dz' in camera axes (right, up, -forward)")
    p.add_argument("--spp", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--res", type=_parse_res, default=None, help="override camera WxH")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("dataset", help="generate a training dataset")
    p.add_argument("--scenes", required=True, help="directory of scene .json files")
    p.add_argument("--out", required=True)
    p.add_argument("--pairs", type=int, default=8)
    p.add_argument("--res", type=_parse_res, default=(256, 256))
    p.add_argument("--spp", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius-min", type=float, default=0.1)
    p.add_argument("--radius-max", type=float, default=0.3)
    p.add_argument("--orbs-min", type=int, default=1)
    p.add_argument("--orbs-max", type=int, default=4)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--identity-offset", action="store_true",
                   help="debug: force zero novel offset (reshaded == input)")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("encode", help="encode a depth PFM to 11-channel disparity planes")
    p.add_argument("--depth", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("metrics", help="PSNR / masked L1 between two PFMs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--mask", default=None, help="validity PNG")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("warp", help="forward-warp an image to a novel pose")
    p.add_argument("--image", required=True)
    p.add_argument("--depth", required=True)
    p.add_argument("--pose", required=True, help='JSON {"input": cam, "novel": cam}')
    p.add_argument("--fill", action="store_true", help="diffuse-fill holes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_warp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
