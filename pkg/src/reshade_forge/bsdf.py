"""BRDF evaluation and importance sampling.

Three surface models: Lambertian (albedo/pi, cosine-sampled), perfect
mirror (delta, handled in sampling only), and a GGX conductor
(Torrance-Sparrow D*F*G / (4 cos_o cos_i) with Smith G and Schlick
Fresnel, alpha = roughness^2, NDF half-vector sampling).

Directions follow the light-transport convention: w_out points from the
surface toward the viewer, w_in toward the light; both unit length.  The
normal passed in is the oriented shading normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .scene import Material

MAT_LAMBERTIAN = 0
MAT_MIRROR = 1
MAT_GGX = 2

_MATERIAL_CODE = {"lambertian": MAT_LAMBERTIAN, "mirror": MAT_MIRROR, "ggx_conductor": MAT_GGX}

INV_PI = 1.0 / math.pi


def material_code(kind: str) -> int:
    return _MATERIAL_CODE[kind]


@njit(cache=True, inline="always")
def _onb(nx, ny, nz):
    """Orthonormal tangent/bitangent around a unit normal."""
    if abs(nx) > 0.9:
        tx, ty, tz = 0.0, 1.0, 0.0
    else:
        tx, ty, tz = 1.0, 0.0, 0.0
    # b = normalize(n x t), t = b x n
    bx = ny * tz - nz * ty
    by = nz * tx - nx * tz
    bz = nx * ty - ny * tx
    inv = 1.0 / math.sqrt(bx * bx + by * by + bz * bz)
    bx *= inv
    by *= inv
    bz *= inv
    tx = by * nz - bz * ny
    ty = bz * nx - bx * nz
    tz = bx * ny - by * nx
    return tx, ty, tz, bx, by, bz


@njit(cache=True, inline="always")
def _ggx_d(cos_h, alpha):
    a2 = alpha * alpha
    d = cos_h * cos_h * (a2 - 1.0) + 1.0
    return a2 / (math.pi * d * d)


@njit(cache=True, inline="always")
def _smith_g1(cos_v, alpha):
    a2 = alpha * alpha
    return 2.0 * cos_v / (cos_v + math.sqrt(a2 + (1.0 - a2) * cos_v * cos_v))


@njit(cache=True)
def eval_bsdf_rgb(kind, cr, cg, cb, roughness, wox, woy, woz, wix, wiy, wiz, nx, ny, nz):
    """BRDF value (finite part only; delta mirrors evaluate to zero)."""
    cos_o = wox * nx + woy * ny + woz * nz
    cos_i = wix * nx + wiy * ny + wiz * nz
    if cos_o <= 0.0 or cos_i <= 0.0:
        return 0.0, 0.0, 0.0
    if kind == MAT_LAMBERTIAN:
        return cr * INV_PI, cg * INV_PI, cb * INV_PI
    if kind == MAT_MIRROR:
        return 0.0, 0.0, 0.0
    # GGX conductor
    hx = wox + wix
    hy = woy + wiy
    hz = woz + wiz
    hl = math.sqrt(hx * hx + hy * hy + hz * hz)
    if hl < 1e-12:
        return 0.0, 0.0, 0.0
    hx /= hl
    hy /= hl
    hz /= hl
    cos_h = hx * nx + hy * ny + hz * nz
    if cos_h <= 0.0:
        return 0.0, 0.0, 0.0
    alpha = roughness * roughness
    d = _ggx_d(cos_h, alpha)
    g = _smith_g1(cos_o, alpha) * _smith_g1(cos_i, alpha)
    oh = wox * hx + woy * hy + woz * hz
    if oh <= 0.0:
        return 0.0, 0.0, 0.0
    s = 1.0 - oh
    s5 = s * s * s * s * s
    scale = d * g / (4.0 * cos_o * cos_i)
    fr = (cr + (1.0 - cr) * s5) * scale
    fg = (cg + (1.0 - cg) * s5) * scale
    fb = (cb + (1.0 - cb) * s5) * scale
    return fr, fg, fb


@njit(cache=True)
def pdf_bsdf(kind, roughness, wox, woy, woz, wix, wiy, wiz, nx, ny, nz):
    """Solid-angle pdf of sample_bsdf for non-delta materials (0 for mirror)."""
    cos_o = wox * nx + woy * ny + woz * nz
    cos_i = wix * nx + wiy * ny + wiz * nz
    if cos_o <= 0.0 or cos_i <= 0.0:
        return 0.0
    if kind == MAT_LAMBERTIAN:
        return cos_i * INV_PI
    if kind == MAT_MIRROR:
        return 0.0
    hx = wox + wix
    hy = woy + wiy
    hz = woz + wiz
    hl = math.sqrt(hx * hx + hy * hy + hz * hz)
    if hl < 1e-12:
        return 0.0
    hx /= hl
    hy /= hl
    hz /= hl
    cos_h = hx * nx + hy * ny + hz * nz
    oh = wox * hx + woy * hy + woz * hz
    if cos_h <= 0.0 or oh <= 0.0:
        return 0.0
    alpha = roughness * roughness
    return _ggx_d(cos_h, alpha) * cos_h / (4.0 * oh)


@njit(cache=True)
def sample_bsdf_rgb(kind, cr, cg, cb, roughness, wox, woy, woz, nx, ny, nz, u1, u2):
    """Draw a continuation direction.

    Returns (wix, wiy, wiz, pdf, wr, wg, wb, is_delta) where (wr, wg, wb)
    is the path throughput weight f * cos / pdf (the albedo/reflectance for
    the analytically-cancelling models).  A zero weight means "terminate".
    """
    if kind == MAT_LAMBERTIAN:
        # cosine-weighted hemisphere around the oriented normal
        r = math.sqrt(u1)
        phi = 2.0 * math.pi * u2
        lx = r * math.cos(phi)
        ly = r * math.sin(phi)
        lz = math.sqrt(max(0.0, 1.0 - u1))
        tx, ty, tz, bx, by, bz = _onb(nx, ny, nz)
        wix = lx * tx + ly * bx + lz * nx
        wiy = lx * ty + ly * by + lz * ny
        wiz = lx * tz + ly * bz + lz * nz
        pdf = lz * INV_PI
        if pdf <= 0.0:
            return nx, ny, nz, 0.0, 0.0, 0.0, 0.0, False
        return wix, wiy, wiz, pdf, cr, cg, cb, False

    if kind == MAT_MIRROR:
        d = wox * nx + woy * ny + woz * nz
        wix = 2.0 * d * nx - wox
        wiy = 2.0 * d * ny - woy
        wiz = 2.0 * d * nz - woz
        if d <= 0.0:
            # viewer below the surface (invalid reshading region): terminate
            return wix, wiy, wiz, 0.0, 0.0, 0.0, 0.0, True
        return wix, wiy, wiz, 1.0, cr, cg, cb, True

    # GGX: sample the half-vector from the NDF, reflect w_out about it
    alpha = roughness * roughness
    phi = 2.0 * math.pi * u1
    cos2 = (1.0 - u2) / (1.0 + (alpha * alpha - 1.0) * u2)
    cos_h = math.sqrt(cos2)
    sin_h = math.sqrt(max(0.0, 1.0 - cos2))
    lx = sin_h * math.cos(phi)
    ly = sin_h * math.sin(phi)
    tx, ty, tz, bx, by, bz = _onb(nx, ny, nz)
    hx = lx * tx + ly * bx + cos_h * nx
    hy = lx * ty + ly * by + cos_h * ny
    hz = lx * tz + ly * bz + cos_h * nz
    oh = wox * hx + woy * hy + woz * hz
    if oh <= 0.0:
        return nx, ny, nz, 0.0, 0.0, 0.0, 0.0, False
    wix = 2.0 * oh * hx - wox
    wiy = 2.0 * oh * hy - woy
    wiz = 2.0 * oh * hz - woz
    cos_i = wix * nx + wiy * ny + wiz * nz
    cos_o = wox * nx + woy * ny + woz * nz
    if cos_i <= 0.0 or cos_o <= 0.0:
        return wix, wiy, wiz, 0.0, 0.0, 0.0, 0.0, False
    d = _ggx_d(cos_h, alpha)
    pdf = d * cos_h / (4.0 * oh)
    if pdf <= 1e-300:
        return wix, wiy, wiz, 0.0, 0.0, 0.0, 0.0, False
    g = _smith_g1(cos_o, alpha) * _smith_g1(cos_i, alpha)
    s = 1.0 - oh
    s5 = s * s * s * s * s
    # f * cos_i / pdf with D cancelled analytically
    scale = g * oh / (cos_o * cos_h)
    wr = (cr + (1.0 - cr) * s5) * scale
    wg = (cg + (1.0 - cg) * s5) * scale
    wb = (cb + (1.0 - cb) * s5) * scale
    return wix, wiy, wiz, pdf, wr, wg, wb, False


# ---------------------------------------------------------------------------
# Python-level wrappers operating on scene Materials


@dataclass(frozen=True)
class BsdfSample:
    w_in: np.ndarray
    pdf: float  # solid-angle density; meaningless when is_delta
    weight: np.ndarray  # throughput weight f * cos / pdf
    is_delta: bool


def eval_bsdf(material: Material, w_out, w_in, normal) -> np.ndarray:
    """BRDF value; zero when either direction is below the hemisphere.
    Procedural textures are resolved by the renderer (needs the hit point),
    so this sees the material's base color."""
    wo = np.asarray(w_out, float)
    wi = np.asarray(w_in, float)
    n = np.asarray(normal, float)
    cr, cg, cb = material.color
    out = eval_bsdf_rgb(
        material_code(material.kind), cr, cg, cb, material.roughness,
        wo[0], wo[1], wo[2], wi[0], wi[1], wi[2], n[0], n[1], n[2],
    )
    return np.array(out)


def sample_bsdf(material: Material, w_out, normal, u: tuple[float, float]) -> BsdfSample:
    wo = np.asarray(w_out, float)
    n = np.asarray(normal, float)
    cr, cg, cb = material.color
    wix, wiy, wiz, pdf, wr, wg, wb, is_delta = sample_bsdf_rgb(
        material_code(material.kind), cr, cg, cb, material.roughness,
        wo[0], wo[1], wo[2], n[0], n[1], n[2], float(u[0]), float(u[1]),
    )
    return BsdfSample(
        w_in=np.array([wix, wiy, wiz]),
        pdf=pdf,
        weight=np.array([wr, wg, wb]),
        is_delta=bool(is_delta),
    )
