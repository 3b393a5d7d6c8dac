"""Unidirectional path tracer with a reshading mode.

The estimator shades every first hit toward an arbitrary view point: the
input image uses the camera position, the reshaded image uses the novel
camera position.  Both AOVs of a sample run the same compiled code on the
same random stream, so rendering with a zero offset reproduces the input
image bit for bit.

Light transport: next-event estimation toward one uniformly chosen
emissive primitive, combined with BSDF sampling via the balance heuristic;
environment light and emissive planes contribute through BSDF rays only.
Everything is deterministic in (seed, pixel, sample): results never depend
on tile scheduling or worker count.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import numba
from numba import njit, prange

from . import geometry
from .bsdf import (
    MAT_MIRROR,
    eval_bsdf_rgb,
    material_code,
    pdf_bsdf,
    sample_bsdf_rgb,
)
from .camera import PinholeCamera
from .geometry import (
    SHAPE_PLANE,
    SHAPE_QUAD,
    SHAPE_SPHERE,
    Hit,
    Ray,
    intersect_scene,
    occluded,
)
from .rng import STREAM_JITTER, STREAM_SHADE, hash_cell, next_uniform, stream_state
from .scene import Plane, Quad, SceneDescription, Sphere

U64 = np.uint64

T_MIN = 1e-6  # minimum ray parameter for all rays
SPAWN_EPS = 1e-6  # origin offset along the geometric normal for spawned rays
MIN_LIGHT_DIST = 1e-4  # NEE contributions closer than this are dropped
RR_START_DEPTH = 3  # Russian roulette applies to vertices beyond this
RR_CLAMP_LO = 0.1
RR_CLAMP_HI = 0.95

ENV_CONSTANT = 0
ENV_LATLONG = 1

TEX_NONE = 0
TEX_CHECKER = 1
TEX_NOISE = 2
_TEX_CODE = {"checker": TEX_CHECKER, "value-noise": TEX_NOISE}


@dataclass(eq=False)
class CompiledScene:
    """Scene flattened into numba-friendly tables."""

    prim_kind: np.ndarray  # int8[N]
    prim_data: np.ndarray  # float64[N, 9]
    prim_mat: np.ndarray  # int32[N]
    prim_emis: np.ndarray  # float64[N, 3]
    prim_nee: np.ndarray  # uint8[N]; 1 if usable for next-event estimation
    emitters: np.ndarray  # int64[K] indices of NEE-sampleable primitives
    mat_kind: np.ndarray  # int8[M]
    mat_color: np.ndarray  # float64[M, 3]
    mat_rough: np.ndarray  # float64[M]
    tex_kind: np.ndarray  # int8[M]
    tex_scale: np.ndarray  # float64[M]
    tex_ca: np.ndarray  # float64[M, 3]
    tex_cb: np.ndarray  # float64[M, 3]
    env_kind: int
    env_const: np.ndarray  # float64[3]
    env_img: np.ndarray  # float64[h, w, 3] (1x1 zeros for constant env)
    env_rot: float

    def args(self):
        return (
            self.prim_kind, self.prim_data, self.prim_mat, self.prim_emis,
            self.prim_nee, self.emitters, self.mat_kind, self.mat_color,
            self.mat_rough, self.tex_kind, self.tex_scale, self.tex_ca,
            self.tex_cb, self.env_kind, self.env_const, self.env_img,
            self.env_rot,
        )


@functools.lru_cache(maxsize=32)
def compile_scene(scene: SceneDescription) -> CompiledScene:
    n = len(scene.primitives)
    m = len(scene.materials)
    prim_kind = np.zeros(n, np.int8)
    prim_data = np.zeros((n, 9), np.float64)
    prim_mat = np.zeros(n, np.int32)
    prim_emis = np.zeros((n, 3), np.float64)
    prim_nee = np.zeros(n, np.uint8)
    for i, p in enumerate(scene.primitives):
        s = p.shape
        if isinstance(s, Sphere):
            prim_kind[i] = SHAPE_SPHERE
            prim_data[i, 0:3] = s.center
            prim_data[i, 3] = s.radius
        elif isinstance(s, Quad):
            prim_kind[i] = SHAPE_QUAD
            prim_data[i, 0:3] = s.corner
            prim_data[i, 3:6] = s.edge_u
            prim_data[i, 6:9] = s.edge_v
        elif isinstance(s, Plane):
            prim_kind[i] = SHAPE_PLANE
            prim_data[i, 0:3] = s.point
            normal = np.asarray(s.normal, float)
            prim_data[i, 3:6] = normal / np.linalg.norm(normal)
        else:
            raise TypeError(f"unknown shape {type(s)}")
        prim_mat[i] = p.material_index
        prim_emis[i] = p.emission
        prim_nee[i] = 1 if (p.is_emissive and not isinstance(s, Plane)) else 0
    mat_kind = np.zeros(m, np.int8)
    mat_color = np.zeros((m, 3), np.float64)
    mat_rough = np.zeros(m, np.float64)
    tex_kind = np.zeros(m, np.int8)
    tex_scale = np.ones(m, np.float64)
    tex_ca = np.zeros((m, 3), np.float64)
    tex_cb = np.zeros((m, 3), np.float64)
    for i, mat in enumerate(scene.materials):
        mat_kind[i] = material_code(mat.kind)
        mat_color[i] = mat.color
        mat_rough[i] = mat.roughness
        if mat.texture is not None:
            tex_kind[i] = _TEX_CODE[mat.texture.kind]
            tex_scale[i] = mat.texture.scale
            tex_ca[i] = mat.texture.color_a
            tex_cb[i] = mat.texture.color_b
    env = scene.environment
    if env.kind == "constant":
        env_kind = ENV_CONSTANT
        env_const = np.asarray(env.radiance, np.float64)
        env_img = np.zeros((1, 1, 3), np.float64)
        env_rot = 0.0
    else:
        env_kind = ENV_LATLONG
        env_const = np.zeros(3, np.float64)
        env_img = np.ascontiguousarray(env.image, np.float64)
        env_rot = float(env.rotation)
    return CompiledScene(
        prim_kind=prim_kind, prim_data=prim_data, prim_mat=prim_mat,
        prim_emis=prim_emis, prim_nee=prim_nee,
        emitters=np.flatnonzero(prim_nee).astype(np.int64),
        mat_kind=mat_kind, mat_color=mat_color, mat_rough=mat_rough,
        tex_kind=tex_kind, tex_scale=tex_scale, tex_ca=tex_ca, tex_cb=tex_cb,
        env_kind=env_kind, env_const=env_const, env_img=env_img, env_rot=env_rot,
    )


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True, inline="always")
def _env_radiance(env_kind, env_const, env_img, env_rot, dx, dy, dz):
    if env_kind == ENV_CONSTANT:
        return env_const[0], env_const[1], env_const[2]
    h, w = env_img.shape[0], env_img.shape[1]
    theta = math.acos(min(1.0, max(-1.0, dy)))
    phi = math.atan2(dz, dx) + env_rot
    u = phi / (2.0 * math.pi)
    u -= math.floor(u)
    v = theta / math.pi
    x = u * w - 0.5
    y = v * h - 0.5
    x0 = int(math.floor(x))
    y0 = int(math.floor(y))
    fx = x - x0
    fy = y - y0
    x1 = (x0 + 1) % w
    x0 = x0 % w
    y0 = min(max(y0, 0), h - 1)
    y1 = min(y0 + 1, h - 1)
    r = (env_img[y0, x0, 0] * (1 - fx) + env_img[y0, x1, 0] * fx) * (1 - fy) + (
        env_img[y1, x0, 0] * (1 - fx) + env_img[y1, x1, 0] * fx
    ) * fy
    g = (env_img[y0, x0, 1] * (1 - fx) + env_img[y0, x1, 1] * fx) * (1 - fy) + (
        env_img[y1, x0, 1] * (1 - fx) + env_img[y1, x1, 1] * fx
    ) * fy
    b = (env_img[y0, x0, 2] * (1 - fx) + env_img[y0, x1, 2] * fx) * (1 - fy) + (
        env_img[y1, x0, 2] * (1 - fx) + env_img[y1, x1, 2] * fx
    ) * fy
    return r, g, b


@njit(cache=True, inline="always")
def _smoothstep(t):
    return t * t * (3.0 - 2.0 * t)


@njit(cache=True, inline="always")
def _value_noise(px, py, pz):
    ix = int(math.floor(px))
    iy = int(math.floor(py))
    iz = int(math.floor(pz))
    fx = _smoothstep(px - ix)
    fy = _smoothstep(py - iy)
    fz = _smoothstep(pz - iz)
    v = 0.0
    c000 = hash_cell(ix, iy, iz)
    c100 = hash_cell(ix + 1, iy, iz)
    c010 = hash_cell(ix, iy + 1, iz)
    c110 = hash_cell(ix + 1, iy + 1, iz)
    c001 = hash_cell(ix, iy, iz + 1)
    c101 = hash_cell(ix + 1, iy, iz + 1)
    c011 = hash_cell(ix, iy + 1, iz + 1)
    c111 = hash_cell(ix + 1, iy + 1, iz + 1)
    v = (
        ((c000 * (1 - fx) + c100 * fx) * (1 - fy) + (c010 * (1 - fx) + c110 * fx) * fy)
        * (1 - fz)
        + ((c001 * (1 - fx) + c101 * fx) * (1 - fy) + (c011 * (1 - fx) + c111 * fx) * fy)
        * fz
    )
    return v


@njit(cache=True, inline="always")
def _surface_color(
    mi, px, py, pz, mat_color, tex_kind, tex_scale, tex_ca, tex_cb
):
    tk = tex_kind[mi]
    if tk == TEX_NONE:
        return mat_color[mi, 0], mat_color[mi, 1], mat_color[mi, 2]
    s = tex_scale[mi]
    if tk == TEX_CHECKER:
        k = int(math.floor(px * s)) + int(math.floor(py * s)) + int(math.floor(pz * s))
        if k % 2 == 0:
            return tex_ca[mi, 0], tex_ca[mi, 1], tex_ca[mi, 2]
        return tex_cb[mi, 0], tex_cb[mi, 1], tex_cb[mi, 2]
    t = _value_noise(px * s, py * s, pz * s)
    r = tex_ca[mi, 0] + (tex_cb[mi, 0] - tex_ca[mi, 0]) * t
    g = tex_ca[mi, 1] + (tex_cb[mi, 1] - tex_ca[mi, 1]) * t
    b = tex_ca[mi, 2] + (tex_cb[mi, 2] - tex_ca[mi, 2]) * t
    return r, g, b


@njit(cache=True, inline="always")
def _sample_emitter(prim_kind, prim_data, light, px, py, pz, u1, u2):
    """Sample a point on an emissive primitive as seen from (px, py, pz).

    Returns (yx, yy, yz, nyx, nyy, nyz, pdf_solid_angle, ok).  Spheres use
    cone sampling of the subtended solid angle (uniform-area fallback when
    the shading point is inside); quads are sampled uniformly by area.
    """
    if prim_kind[light] == SHAPE_SPHERE:
        cx, cy, cz, r = prim_data[light, 0], prim_data[light, 1], prim_data[light, 2], prim_data[light, 3]
        dcx = cx - px
        dcy = cy - py
        dcz = cz - pz
        dc2 = dcx * dcx + dcy * dcy + dcz * dcz
        if dc2 <= r * r * 1.0000001:
            # inside (or on) the sphere: uniform area sampling
            z = 1.0 - 2.0 * u1
            s = math.sqrt(max(0.0, 1.0 - z * z))
            phi = 2.0 * math.pi * u2
            nyx = s * math.cos(phi)
            nyy = s * math.sin(phi)
            nyz = z
            yx = cx + r * nyx
            yy = cy + r * nyy
            yz = cz + r * nyz
            wx = yx - px
            wy = yy - py
            wz = yz - pz
            dist2 = wx * wx + wy * wy + wz * wz
            dist = math.sqrt(dist2)
            if dist < MIN_LIGHT_DIST:
                return 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, False
            cos_y = -(nyx * wx + nyy * wy + nyz * wz) / dist
            if abs(cos_y) < 1e-9:
                return 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, False
            pdf = dist2 / (4.0 * math.pi * r * r * abs(cos_y))
            return yx, yy, yz, nyx, nyy, nyz, pdf, True
        dc = math.sqrt(dc2)
        sin2_max = r * r / dc2
        cos_max = math.sqrt(max(0.0, 1.0 - sin2_max))
        cos_t = 1.0 - u1 * (1.0 - cos_max)
        sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
        phi = 2.0 * math.pi * u2
        wcx = dcx / dc
        wcy = dcy / dc
        wcz = dcz / dc
        # frame around the center direction
        if abs(wcx) > 0.9:
            ax, ay, az = 0.0, 1.0, 0.0
        else:
            ax, ay, az = 1.0, 0.0, 0.0
        bx = wcy * az - wcz * ay
        by = wcz * ax - wcx * az
        bz = wcx * ay - wcy * ax
        inv = 1.0 / math.sqrt(bx * bx + by * by + bz * bz)
        bx *= inv
        by *= inv
        bz *= inv
        tx = by * wcz - bz * wcy
        ty = bz * wcx - bx * wcz
        tz = bx * wcy - by * wcx
        wx = sin_t * math.cos(phi) * tx + sin_t * math.sin(phi) * bx + cos_t * wcx
        wy = sin_t * math.cos(phi) * ty + sin_t * math.sin(phi) * by + cos_t * wcy
        wz = sin_t * math.cos(phi) * tz + sin_t * math.sin(phi) * bz + cos_t * wcz
        # distance to the sphere along the sampled direction
        under = r * r - dc2 * sin_t * sin_t
        ds = dc * cos_t - math.sqrt(max(0.0, under))
        yx = px + ds * wx
        yy = py + ds * wy
        yz = pz + ds * wz
        nyx = (yx - cx) / r
        nyy = (yy - cy) / r
        nyz = (yz - cz) / r
        nl = math.sqrt(nyx * nyx + nyy * nyy + nyz * nyz)
        nyx /= nl
        nyy /= nl
        nyz /= nl
        solid = 2.0 * math.pi * (1.0 - cos_max)
        if solid < 1e-12:
            return 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, False
        return yx, yy, yz, nyx, nyy, nyz, 1.0 / solid, True
    # quad: uniform by area
    cx, cy, cz = prim_data[light, 0], prim_data[light, 1], prim_data[light, 2]
    eux, euy, euz = prim_data[light, 3], prim_data[light, 4], prim_data[light, 5]
    evx, evy, evz = prim_data[light, 6], prim_data[light, 7], prim_data[light, 8]
    yx = cx + u1 * eux + u2 * evx
    yy = cy + u1 * euy + u2 * evy
    yz = cz + u1 * euz + u2 * evz
    nx = euy * evz - euz * evy
    ny = euz * evx - eux * evz
    nz = eux * evy - euy * evx
    area = math.sqrt(nx * nx + ny * ny + nz * nz)
    if area < 1e-12:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, False
    nx /= area
    ny /= area
    nz /= area
    wx = yx - px
    wy = yy - py
    wz = yz - pz
    dist2 = wx * wx + wy * wy + wz * wz
    dist = math.sqrt(dist2)
    if dist < MIN_LIGHT_DIST:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, False
    cos_y = -(nx * wx + ny * wy + nz * wz) / dist
    if cos_y <= 1e-9:
        # back side of a one-sided emitter
        return 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, False
    pdf = dist2 / (area * cos_y)
    return yx, yy, yz, nx, ny, nz, pdf, True


@njit(cache=True, inline="always")
def _emitter_pdf(prim_kind, prim_data, light, px, py, pz, yx, yy, yz, nyx, nyy, nyz):
    """Solid-angle pdf of _sample_emitter producing point y from x."""
    if prim_kind[light] == SHAPE_SPHERE:
        cx, cy, cz, r = prim_data[light, 0], prim_data[light, 1], prim_data[light, 2], prim_data[light, 3]
        dcx = cx - px
        dcy = cy - py
        dcz = cz - pz
        dc2 = dcx * dcx + dcy * dcy + dcz * dcz
        wx = yx - px
        wy = yy - py
        wz = yz - pz
        dist2 = wx * wx + wy * wy + wz * wz
        dist = math.sqrt(dist2)
        if dist < MIN_LIGHT_DIST:
            return 0.0
        if dc2 <= r * r * 1.0000001:
            cos_y = -(nyx * wx + nyy * wy + nyz * wz) / dist
            if abs(cos_y) < 1e-9:
                return 0.0
            return dist2 / (4.0 * math.pi * r * r * abs(cos_y))
        cos_max = math.sqrt(max(0.0, 1.0 - r * r / dc2))
        solid = 2.0 * math.pi * (1.0 - cos_max)
        if solid < 1e-12:
            return 0.0
        return 1.0 / solid
    eux, euy, euz = prim_data[light, 3], prim_data[light, 4], prim_data[light, 5]
    evx, evy, evz = prim_data[light, 6], prim_data[light, 7], prim_data[light, 8]
    nx = euy * evz - euz * evy
    ny = euz * evx - eux * evz
    nz = eux * evy - euy * evx
    area = math.sqrt(nx * nx + ny * ny + nz * nz)
    if area < 1e-12:
        return 0.0
    wx = yx - px
    wy = yy - py
    wz = yz - pz
    dist2 = wx * wx + wy * wy + wz * wz
    dist = math.sqrt(dist2)
    if dist < MIN_LIGHT_DIST:
        return 0.0
    cos_y = -(nx * wx + ny * wy + nz * wz) / (dist * area)
    if cos_y <= 1e-9:
        return 0.0
    return dist2 / (area * cos_y)


@njit(cache=True)
def trace_path(
    prim_kind, prim_data, prim_mat, prim_emis, prim_nee, emitters,
    mat_kind, mat_color, mat_rough, tex_kind, tex_scale, tex_ca, tex_cb,
    env_kind, env_const, env_img, env_rot,
    ox, oy, oz, dx, dy, dz, vx, vy, vz, state, max_depth,
):
    """Path-trace one sample, shading the first hit toward view point v.

    Returns (r, g, b, valid, hx, hy, hz, nx, ny, nz, hit) where (hx..nz)
    describe the first hit (position, oriented normal) for AOV recording.
    `valid` is False when the oriented first-hit normal faces away from v.
    """
    t, pi, ngx, ngy, ngz = intersect_scene(
        prim_kind, prim_data, ox, oy, oz, dx, dy, dz, T_MIN, np.inf
    )
    if pi < 0:
        r, g, b = _env_radiance(env_kind, env_const, env_img, env_rot, dx, dy, dz)
        return r, g, b, True, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, False
    px = ox + t * dx
    py = oy + t * dy
    pz = oz + t * dz
    # oriented normal: faces the origin of the input primary ray
    if ngx * dx + ngy * dy + ngz * dz > 0.0:
        nox, noy, noz = -ngx, -ngy, -ngz
    else:
        nox, noy, noz = ngx, ngy, ngz
    fhx, fhy, fhz = px, py, pz
    fnx, fny, fnz = nox, noy, noz
    # outgoing direction toward the view point (camera or novel position)
    wx = vx - px
    wy = vy - py
    wz = vz - pz
    wl = math.sqrt(wx * wx + wy * wy + wz * wz)
    if wl < 1e-12:
        wox, woy, woz = nox, noy, noz
    else:
        wox, woy, woz = wx / wl, wy / wl, wz / wl
    valid = (nox * wox + noy * woy + noz * woz) > 0.0

    rr_ = 0.0
    rg_ = 0.0
    rb_ = 0.0
    # emission at the first vertex (emitters are one-sided: geometric front)
    if prim_emis[pi, 0] > 0.0 or prim_emis[pi, 1] > 0.0 or prim_emis[pi, 2] > 0.0:
        if ngx * wox + ngy * woy + ngz * woz > 0.0:
            rr_ += prim_emis[pi, 0]
            rg_ += prim_emis[pi, 1]
            rb_ += prim_emis[pi, 2]

    tpr = 1.0
    tpg = 1.0
    tpb = 1.0
    n_em = emitters.shape[0]
    depth = 1
    while True:
        mi = prim_mat[pi]
        kind = mat_kind[mi]
        bcr, bcg, bcb = _surface_color(mi, px, py, pz, mat_color, tex_kind, tex_scale, tex_ca, tex_cb)
        # -- next-event estimation (skipped at delta vertices)
        if kind != MAT_MIRROR and n_em > 0:
            u, state = next_uniform(state)
            li = int(u * n_em)
            if li >= n_em:
                li = n_em - 1
            light = emitters[li]
            u1, state = next_uniform(state)
            u2, state = next_uniform(state)
            yx, yy, yz, nyx, nyy, nyz, pdf_sa, ok = _sample_emitter(
                prim_kind, prim_data, light, px, py, pz, u1, u2
            )
            if ok and pdf_sa > 0.0:
                lwx = yx - px
                lwy = yy - py
                lwz = yz - pz
                dist = math.sqrt(lwx * lwx + lwy * lwy + lwz * lwz)
                if dist > MIN_LIGHT_DIST:
                    lwx /= dist
                    lwy /= dist
                    lwz /= dist
                    fr, fg, fb = eval_bsdf_rgb(
                        kind, bcr, bcg, bcb, mat_rough[mi],
                        wox, woy, woz, lwx, lwy, lwz, nox, noy, noz,
                    )
                    if fr > 0.0 or fg > 0.0 or fb > 0.0:
                        side = 1.0 if (ngx * lwx + ngy * lwy + ngz * lwz) > 0.0 else -1.0
                        sx = px + side * ngx * SPAWN_EPS
                        sy = py + side * ngy * SPAWN_EPS
                        sz = pz + side * ngz * SPAWN_EPS
                        if not occluded(
                            prim_kind, prim_data, sx, sy, sz, lwx, lwy, lwz,
                            T_MIN, dist * (1.0 - 1e-6) - SPAWN_EPS,
                        ):
                            pdf_l = pdf_sa / n_em
                            pdf_b = pdf_bsdf(
                                kind, mat_rough[mi], wox, woy, woz,
                                lwx, lwy, lwz, nox, noy, noz,
                            )
                            w_mis = pdf_l / (pdf_l + pdf_b)
                            cos_x = nox * lwx + noy * lwy + noz * lwz
                            scale = cos_x * w_mis / pdf_l
                            rr_ += tpr * fr * prim_emis[light, 0] * scale
                            rg_ += tpg * fg * prim_emis[light, 1] * scale
                            rb_ += tpb * fb * prim_emis[light, 2] * scale
        # -- BSDF continuation
        u1, state = next_uniform(state)
        u2, state = next_uniform(state)
        wix, wiy, wiz, pdf_b, wr, wg, wb, is_delta = sample_bsdf_rgb(
            kind, bcr, bcg, bcb, mat_rough[mi],
            wox, woy, woz, nox, noy, noz, u1, u2,
        )
        if wr <= 0.0 and wg <= 0.0 and wb <= 0.0:
            break
        tpr *= wr
        tpg *= wg
        tpb *= wb
        side = 1.0 if (ngx * wix + ngy * wiy + ngz * wiz) > 0.0 else -1.0
        sx = px + side * ngx * SPAWN_EPS
        sy = py + side * ngy * SPAWN_EPS
        sz = pz + side * ngz * SPAWN_EPS
        t2, pi2, ng2x, ng2y, ng2z = intersect_scene(
            prim_kind, prim_data, sx, sy, sz, wix, wiy, wiz, T_MIN, np.inf
        )
        if pi2 < 0:
            er, eg, eb = _env_radiance(env_kind, env_const, env_img, env_rot, wix, wiy, wiz)
            rr_ += tpr * er
            rg_ += tpg * eg
            rb_ += tpb * eb
            break
        qx = sx + t2 * wix
        qy = sy + t2 * wiy
        qz = sz + t2 * wiz
        # emission pickup, weighted against the light-sampling strategy
        if prim_emis[pi2, 0] > 0.0 or prim_emis[pi2, 1] > 0.0 or prim_emis[pi2, 2] > 0.0:
            if ng2x * wix + ng2y * wiy + ng2z * wiz < 0.0:  # front side
                w_mis = 1.0
                if (not is_delta) and prim_nee[pi2] == 1 and n_em > 0:
                    nyx, nyy, nyz = ng2x, ng2y, ng2z
                    pdf_l2 = _emitter_pdf(
                        prim_kind, prim_data, pi2, px, py, pz, qx, qy, qz, nyx, nyy, nyz
                    ) / n_em
                    w_mis = pdf_b / (pdf_b + pdf_l2)
                rr_ += tpr * prim_emis[pi2, 0] * w_mis
                rg_ += tpg * prim_emis[pi2, 1] * w_mis
                rb_ += tpb * prim_emis[pi2, 2] * w_mis
        depth += 1
        if depth > max_depth:
            break
        # Russian roulette
        if depth > RR_START_DEPTH:
            q = max(tpr, max(tpg, tpb))
            q = min(max(q, RR_CLAMP_LO), RR_CLAMP_HI)
            u, state = next_uniform(state)
            if u >= q:
                break
            tpr /= q
            tpg /= q
            tpb /= q
        # advance to the new vertex
        px, py, pz = qx, qy, qz
        pi = pi2
        ngx, ngy, ngz = ng2x, ng2y, ng2z
        wox, woy, woz = -wix, -wiy, -wiz
        if ngx * wix + ngy * wiy + ngz * wiz > 0.0:
            nox, noy, noz = -ngx, -ngy, -ngz
        else:
            nox, noy, noz = ngx, ngy, ngz
    return rr_, rg_, rb_, valid, fhx, fhy, fhz, fnx, fny, fnz, True


@njit(cache=True, parallel=True)
def _render_kernel(
    prim_kind, prim_data, prim_mat, prim_emis, prim_nee, emitters,
    mat_kind, mat_color, mat_rough, tex_kind, tex_scale, tex_ca, tex_cb,
    env_kind, env_const, env_img, env_rot,
    cpx, cpy, cpz, rx, ry, rz, ux, uy, uz, fx, fy, fz, tan_half, aspect,
    width, height, spp, nvx, nvy, nvz, seed, max_depth,
    out_in, out_re, out_valid, out_depth,
    record, rec_pos, rec_nrm, rec_hit, rec_valid,
):
    for j in prange(height):
        for i in range(width):
            pix = j * width + i
            air = 0.0
            aig = 0.0
            aib = 0.0
            arr = 0.0
            arg = 0.0
            arb = 0.0
            all_valid = True
            for s in range(spp):
                stj = stream_state(seed, pix, s, STREAM_JITTER)
                jx, stj = next_uniform(stj)
                jy, stj = next_uniform(stj)
                u = i + jx
                v = j + jy
                ndx = (2.0 * u / width - 1.0) * tan_half * aspect
                ndy = (1.0 - 2.0 * v / height) * tan_half
                dx = fx + ndx * rx + ndy * ux
                dy = fy + ndx * ry + ndy * uy
                dz = fz + ndx * rz + ndy * uz
                dl = math.sqrt(dx * dx + dy * dy + dz * dz)
                dx /= dl
                dy /= dl
                dz /= dl
                st = stream_state(seed, pix, s, STREAM_SHADE)
                ir, ig, ib, _, _, _, _, _, _, _, _ = trace_path(
                    prim_kind, prim_data, prim_mat, prim_emis, prim_nee, emitters,
                    mat_kind, mat_color, mat_rough, tex_kind, tex_scale, tex_ca, tex_cb,
                    env_kind, env_const, env_img, env_rot,
                    cpx, cpy, cpz, dx, dy, dz, cpx, cpy, cpz, st, max_depth,
                )
                sr, sg, sb, valid, hx, hy, hz, nx, ny, nz, hitf = trace_path(
                    prim_kind, prim_data, prim_mat, prim_emis, prim_nee, emitters,
                    mat_kind, mat_color, mat_rough, tex_kind, tex_scale, tex_ca, tex_cb,
                    env_kind, env_const, env_img, env_rot,
                    cpx, cpy, cpz, dx, dy, dz, nvx, nvy, nvz, st, max_depth,
                )
                air += ir
                aig += ig
                aib += ib
                arr += sr
                arg += sg
                arb += sb
                all_valid = all_valid and valid
                if record:
                    rec_pos[j, i, s, 0] = hx
                    rec_pos[j, i, s, 1] = hy
                    rec_pos[j, i, s, 2] = hz
                    rec_nrm[j, i, s, 0] = nx
                    rec_nrm[j, i, s, 1] = ny
                    rec_nrm[j, i, s, 2] = nz
                    rec_hit[j, i, s] = 1 if hitf else 0
                    rec_valid[j, i, s] = 1 if valid else 0
            out_in[j, i, 0] = air / spp
            out_in[j, i, 1] = aig / spp
            out_in[j, i, 2] = aib / spp
            out_re[j, i, 0] = arr / spp
            out_re[j, i, 1] = arg / spp
            out_re[j, i, 2] = arb / spp
            out_valid[j, i] = 1 if all_valid else 0
            # planar z-depth from the deterministic center ray
            u = i + 0.5
            v = j + 0.5
            ndx = (2.0 * u / width - 1.0) * tan_half * aspect
            ndy = (1.0 - 2.0 * v / height) * tan_half
            dx = fx + ndx * rx + ndy * ux
            dy = fy + ndx * ry + ndy * uy
            dz = fz + ndx * rz + ndy * uz
            dl = math.sqrt(dx * dx + dy * dy + dz * dz)
            dx /= dl
            dy /= dl
            dz /= dl
            t, pi, _, _, _ = intersect_scene(
                prim_kind, prim_data, cpx, cpy, cpz, dx, dy, dz, T_MIN, np.inf
            )
            if pi < 0:
                out_depth[j, i] = np.inf
            else:
                out_depth[j, i] = t * (dx * fx + dy * fy + dz * fz)


# ---------------------------------------------------------------------------
# Python API


@dataclass
class FirstHitRecord:
    """Per-sample first-hit data (for validity cross-checks)."""

    position: np.ndarray  # (H, W, spp, 3) float64
    normal: np.ndarray  # (H, W, spp, 3) float64, oriented toward the camera
    hit: np.ndarray  # (H, W, spp) bool; False = environment
    valid: np.ndarray  # (H, W, spp) bool


@dataclass
class RenderOutputs:
    input_hdr: np.ndarray  # (H, W, 3) float32
    reshaded_hdr: np.ndarray  # (H, W, 3) float32
    depth: np.ndarray  # (H, W) float32, +inf on env
    validity: np.ndarray  # (H, W) bool
    first_hits: FirstHitRecord | None = None


@dataclass(frozen=True)
class ReshadeEstimate:
    radiance: np.ndarray
    valid: bool


def _first_hit(scene: SceneDescription, ray: Ray) -> Hit | None:
    cs = compile_scene(scene)
    o, d = ray.origin, ray.direction
    t, pi, nx, ny, nz = intersect_scene(
        cs.prim_kind, cs.prim_data, o[0], o[1], o[2], d[0], d[1], d[2],
        ray.t_min, ray.t_max,
    )
    if pi < 0:
        return None
    point = np.array(o) + t * np.array(d)
    normal = np.array([nx, ny, nz])
    emis = cs.prim_emis[pi]
    toward_origin = -(normal @ d) > 0.0
    emitted = emis.copy() if toward_origin else np.zeros(3)
    return Hit(t=t, point=point, normal=normal, material_index=int(cs.prim_mat[pi]), emitted=emitted)


def intersect(scene: SceneDescription, ray: Ray) -> Hit | None:
    """Nearest hit of a ray against the scene, None on miss."""
    return _first_hit(scene, ray)


def estimate_radiance(scene: SceneDescription, ray: Ray, rng: int, max_depth: int = 8) -> np.ndarray:
    """One path-traced sample of outgoing radiance along -ray.direction.
    `rng` seeds the sample's private random stream."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    cs = compile_scene(scene)
    o, d = ray.origin, ray.direction
    r, g, b, _, _, _, _, _, _, _, _ = trace_path(
        *cs.args(), o[0], o[1], o[2], d[0], d[1], d[2],
        o[0], o[1], o[2], U64(rng), max_depth,
    )
    return np.array([r, g, b])


def estimate_reshaded(
    scene: SceneDescription, input_ray: Ray, novel_position, rng: int, max_depth: int = 8
) -> ReshadeEstimate:
    """Shade the first hit of `input_ray` toward `novel_position`.

    The novel direction drives emission lookup, light sampling, and the
    continuation ray; there is intentionally no visibility test between the
    hit and the novel position.  `valid` is False when the oriented surface
    normal faces away from the novel position.  With novel_position equal
    to the ray origin and the same rng this reproduces estimate_radiance
    bit for bit.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    cs = compile_scene(scene)
    o, d = input_ray.origin, input_ray.direction
    nv = np.asarray(novel_position, float)
    if not np.isfinite(nv).all():
        raise ValueError("novel_position must be finite")
    r, g, b, valid, _, _, _, _, _, _, _ = trace_path(
        *cs.args(), o[0], o[1], o[2], d[0], d[1], d[2],
        nv[0], nv[1], nv[2], U64(rng), max_depth,
    )
    return ReshadeEstimate(radiance=np.array([r, g, b]), valid=bool(valid))


def render(
    scene: SceneDescription,
    camera: PinholeCamera,
    novel_position,
    spp: int,
    seed: int,
    *,
    max_depth: int = 8,
    workers: int | None = None,
    record_first_hits: bool = False,
) -> RenderOutputs:
    """Render all four AOVs.

    novel_position is an absolute world-space point.  Results are bitwise
    identical for any worker count; `workers` merely caps render threads.
    """
    if spp < 1:
        raise ValueError("spp must be >= 1")
    cs = compile_scene(scene)
    right, up, fwd = camera.basis()
    pos = np.asarray(camera.position, float)
    nv = np.asarray(novel_position, float)
    w, h = camera.width, camera.height
    out_in = np.zeros((h, w, 3), np.float64)
    out_re = np.zeros((h, w, 3), np.float64)
    out_valid = np.zeros((h, w), np.uint8)
    out_depth = np.zeros((h, w), np.float64)
    if record_first_hits:
        rec_pos = np.zeros((h, w, spp, 3), np.float64)
        rec_nrm = np.zeros((h, w, spp, 3), np.float64)
        rec_hit = np.zeros((h, w, spp), np.uint8)
        rec_valid = np.zeros((h, w, spp), np.uint8)
    else:
        rec_pos = np.zeros((1, 1, 1, 3), np.float64)
        rec_nrm = np.zeros((1, 1, 1, 3), np.float64)
        rec_hit = np.zeros((1, 1, 1), np.uint8)
        rec_valid = np.zeros((1, 1, 1), np.uint8)
    old_threads = numba.get_num_threads()
    if workers is not None:
        numba.set_num_threads(max(1, min(workers, old_threads)))
    try:
        _render_kernel(
            *cs.args(),
            pos[0], pos[1], pos[2],
            right[0], right[1], right[2],
            up[0], up[1], up[2],
            fwd[0], fwd[1], fwd[2],
            camera.tan_half_fov, camera.aspect,
            w, h, spp, nv[0], nv[1], nv[2], U64(seed), max_depth,
            out_in, out_re, out_valid, out_depth,
            record_first_hits, rec_pos, rec_nrm, rec_hit, rec_valid,
        )
    finally:
        if workers is not None:
            numba.set_num_threads(old_threads)
    first_hits = None
    if record_first_hits:
        first_hits = FirstHitRecord(
            position=rec_pos,
            normal=rec_nrm,
            hit=rec_hit.astype(bool),
            valid=rec_valid.astype(bool),
        )
    return RenderOutputs(
        input_hdr=out_in.astype(np.float32),
        reshaded_hdr=out_re.astype(np.float32),
        depth=out_depth.astype(np.float32),
        validity=out_valid.astype(bool),
        first_hits=first_hits,
    )
