"""Depth-based forward warping to a novel view (non-learned relocation).

Every source pixel is unprojected with its planar depth, reprojected into
the novel camera, and splatted with a z-buffer (nearest wins, lower source
index on exact ties).  Untouched destination pixels are reported as holes
and can optionally be filled by 4-neighbor diffusion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import PinholeCamera


@dataclass(frozen=True)
class CameraPair:
    input: PinholeCamera
    novel: PinholeCamera

    def __post_init__(self):
        if (self.input.width, self.input.height) != (self.novel.width, self.novel.height):
            raise ValueError("input and novel cameras must share a resolution")


@dataclass
class WarpResult:
    warped: np.ndarray  # (H, W, C) float32
    holes: np.ndarray  # (H, W) bool; True where nothing was splatted


def _pixel_grid(w: int, h: int) -> tuple[np.ndarray, np.ndarray]:
    u = (np.arange(w, dtype=np.float64) + 0.5)[None, :].repeat(h, axis=0)
    v = (np.arange(h, dtype=np.float64) + 0.5)[:, None].repeat(w, axis=1)
    return u, v


def _unproject_grid(cam: PinholeCamera, u, v, depth):
    right, up, fwd = cam.basis()
    x = (2.0 * u / cam.width - 1.0) * cam.tan_half_fov * cam.aspect
    y = (1.0 - 2.0 * v / cam.height) * cam.tan_half_fov
    d = fwd[None, None] + x[..., None] * right[None, None] + y[..., None] * up[None, None]
    return np.asarray(cam.position, float)[None, None] + depth[..., None] * d


def _project_grid(cam: PinholeCamera, points):
    right, up, fwd = cam.basis()
    q = points - np.asarray(cam.position, float)[None, None]
    z = q @ fwd
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (q @ right) / (z * cam.tan_half_fov * cam.aspect)
        y = (q @ up) / (z * cam.tan_half_fov)
    u = (x + 1.0) * 0.5 * cam.width
    v = (1.0 - y) * 0.5 * cam.height
    return u, v, z


def fill_holes(image: np.ndarray, holes: np.ndarray, max_iters: int = 32) -> np.ndarray:
    """Diffuse known values into hole pixels from their 4-neighbors."""
    img = image.astype(np.float64).copy()
    known = ~holes.copy()
    for _ in range(max_iters):
        if known.all():
            break
        acc = np.zeros_like(img)
        cnt = np.zeros(holes.shape, np.float64)
        for shift, axis in (((1,), 0), ((-1,), 0), ((1,), 1), ((-1,), 1)):
            k = np.roll(known, shift, axis=axis)
            val = np.roll(img, shift, axis=axis)
            # roll wraps; mask out the wrapped border row/column
            edge = np.zeros_like(k)
            if axis == 0:
                edge[0 if shift[0] == 1 else -1, :] = True
            else:
                edge[:, 0 if shift[0] == 1 else -1] = True
            k = k & ~edge
            acc += np.where(k[..., None], val, 0.0)
            cnt += k
        frontier = (~known) & (cnt > 0)
        img[frontier] = acc[frontier] / cnt[frontier][:, None]
        known |= frontier
    return img.astype(image.dtype)


def forward_warp(
    image: np.ndarray, depth: np.ndarray, pair: CameraPair, fill: bool = False
) -> WarpResult:
    """Warp `image` (H, W, C float) from pair.input to pair.novel using the
    per-pixel planar depth of the input view."""
    img = np.asarray(image, np.float32)
    if img.ndim == 2:
        img = img[:, :, None]
    dep = np.asarray(depth, np.float64)
    h, w = dep.shape
    if img.shape[:2] != (h, w) or (w, h) != (pair.input.width, pair.input.height):
        raise ValueError("image/depth dimensions must match the cameras")

    u, v = _pixel_grid(w, h)
    ok = np.isfinite(dep) & (dep > 0.0)
    pts = _unproject_grid(pair.input, u, v, np.where(ok, dep, 1.0))
    nu, nv, nz = _project_grid(pair.novel, pts)
    ok &= np.isfinite(nz) & (nz > 0.0)
    du = np.floor(nu).astype(np.int64)
    dv = np.floor(nv).astype(np.int64)
    ok &= (du >= 0) & (du < w) & (dv >= 0) & (dv < h)

    src = np.flatnonzero(ok.ravel())
    dest = (dv.ravel()[src] * w + du.ravel()[src]).astype(np.int64)
    zsrc = nz.ravel()[src]
    # farthest first; equal depths ordered by descending source index, so the
    # last write (the winner) is the nearest depth, lowest source index
    order = np.lexsort((-src, -zsrc))
    warped = np.zeros_like(img).reshape(h * w, -1)
    holes = np.ones(h * w, bool)
    flat_img = img.reshape(h * w, -1)
    warped[dest[order]] = flat_img[src[order]]
    holes[dest[order]] = False
    warped = warped.reshape(h, w, -1)
    holes = holes.reshape(h, w)
    if fill:
        warped = fill_holes(warped, holes)
    return WarpResult(warped=warped, holes=holes)
