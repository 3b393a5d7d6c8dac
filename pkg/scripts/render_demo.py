#!/usr/bin/env python3
"""Render an input/reshaded pair from a shipped scene and tonemap previews.

Usage: python scripts/render_demo.py [--scene scenes/env_spheres.json] [--out out/demo]
"""

import argparse
import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from reshade_forge import HdrImage, PinholeCamera, load_scene, tonemap, write_mask_png, write_pfm
from reshade_forge.dataset import offset_to_world
from reshade_forge.tracer import render


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scene", default="scenes/env_spheres.json")
    ap.add_argument("--out", default="out/demo")
    ap.add_argument("--res", type=int, default=256)
    ap.add_argument("--spp", type=int, default=128)
    ap.add_argument("--offset", default="0.25,0.1,0.0", help="camera-axes dx,dy,dz")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    scene = load_scene(args.scene)
    lo, hi = np.asarray(scene.camera_box[0]), np.asarray(scene.camera_box[1])
    camera = PinholeCamera(
        position=tuple(0.5 * (lo + hi)),
        look_at=(0.0, 0.4, -2.2),
        up=(0, 1, 0),
        vertical_fov=math.radians(55.0),
        width=args.res,
        height=args.res,
    )
    offset = np.array([float(c) for c in args.offset.split(",")])
    out = render(scene, camera, offset_to_world(camera, offset), args.spp, args.seed)

    os.makedirs(args.out, exist_ok=True)
    write_pfm(HdrImage(out.input_hdr), os.path.join(args.out, "input.pfm"))
    write_pfm(HdrImage(out.reshaded_hdr), os.path.join(args.out, "reshaded.pfm"))
    write_pfm(HdrImage(out.depth), os.path.join(args.out, "depth.pfm"))
    write_mask_png(out.validity, os.path.join(args.out, "validity.png"))
    # quick LDR previews
    from PIL import Image

    for name, hdr in (("input", out.input_hdr), ("reshaded", out.reshaded_hdr)):
        ldr = tonemap(HdrImage(hdr), exposure=4.0, gamma=2.2).data
        Image.fromarray((ldr * 255).astype(np.uint8)).save(os.path.join(args.out, f"{name}.png"))
    diff = np.abs(out.reshaded_hdr - out.input_hdr).mean(axis=2)
    print(f"wrote AOVs to {args.out}")
    print(f"valid fraction: {out.validity.mean():.3f}  mean |reshaded-input|: {diff.mean():.4f}")


if __name__ == "__main__":
    main()
