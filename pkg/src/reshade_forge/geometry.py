"""Ray/hit types and analytic shape intersection kernels.

The numba kernels are the single source of truth for intersection math;
the render loop and the Python-level API both call them.  Primitives are
flattened into (kind, data) tables: sphere = [cx cy cz r], quad =
[corner eu ev], plane = [point normal].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

INF = np.inf

SHAPE_SPHERE = 0
SHAPE_QUAD = 1
SHAPE_PLANE = 2


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, float, float]
    direction: tuple[float, float, float]  # unit length within 1e-6
    t_min: float = 0.0
    t_max: float = INF

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))
        object.__setattr__(self, "direction", tuple(float(c) for c in self.direction))
        n = math.sqrt(sum(c * c for c in self.direction))
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"ray direction must be unit length, |d|={n}")
        if not (0.0 <= self.t_min < self.t_max):
            raise ValueError(f"need 0 <= t_min < t_max, got [{self.t_min}, {self.t_max}]")


@dataclass(frozen=True)
class Hit:
    t: float
    point: np.ndarray
    normal: np.ndarray  # geometric normal, unit length, not reoriented
    material_index: int
    emitted: np.ndarray = field(default_factory=lambda: np.zeros(3))


@njit(cache=True, inline="always")
def _hit_sphere(cx, cy, cz, r, ox, oy, oz, dx, dy, dz, t_min, t_max):
    """Returns hit distance or -1.0.  Direction must be unit length."""
    ocx = ox - cx
    ocy = oy - cy
    ocz = oz - cz
    b = ocx * dx + ocy * dy + ocz * dz
    c = ocx * ocx + ocy * ocy + ocz * ocz - r * r
    disc = b * b - c
    if disc < 0.0:
        return -1.0
    s = math.sqrt(disc)
    t = -b - s
    if t < t_min:
        t = -b + s
    if t < t_min or t > t_max:
        return -1.0
    return t


@njit(cache=True, inline="always")
def _hit_plane(px, py, pz, nx, ny, nz, ox, oy, oz, dx, dy, dz, t_min, t_max):
    denom = nx * dx + ny * dy + nz * dz
    if abs(denom) < 1e-12:
        return -1.0
    t = (nx * (px - ox) + ny * (py - oy) + nz * (pz - oz)) / denom
    if t < t_min or t > t_max:
        return -1.0
    return t


@njit(cache=True, inline="always")
def _hit_quad(
    cx, cy, cz, eux, euy, euz, evx, evy, evz, ox, oy, oz, dx, dy, dz, t_min, t_max
):
    """Parallelogram intersection; returns t or -1.0."""
    nx = euy * evz - euz * evy
    ny = euz * evx - eux * evz
    nz = eux * evy - euy * evx
    denom = nx * dx + ny * dy + nz * dz
    if abs(denom) < 1e-12:
        return -1.0
    t = (nx * (cx - ox) + ny * (cy - oy) + nz * (cz - oz)) / denom
    if t < t_min or t > t_max:
        return -1.0
    qx = ox + t * dx - cx
    qy = oy + t * dy - cy
    qz = oz + t * dz - cz
    nn = nx * nx + ny * ny + nz * nz
    # u = ((q x ev) . n) / |n|^2,  v = ((eu x q) . n) / |n|^2
    ux = qy * evz - qz * evy
    uy = qz * evx - qx * evz
    uz = qx * evy - qy * evx
    u = (ux * nx + uy * ny + uz * nz) / nn
    if u < 0.0 or u > 1.0:
        return -1.0
    vx = euy * qz - euz * qy
    vy = euz * qx - eux * qz
    vz = eux * qy - euy * qx
    v = (vx * nx + vy * ny + vz * nz) / nn
    if v < 0.0 or v > 1.0:
        return -1.0
    return t


@njit(cache=True)
def intersect_scene(prim_kind, prim_data, ox, oy, oz, dx, dy, dz, t_min, t_max):
    """Nearest hit over all primitives.

    Returns (t, index, nx, ny, nz); index -1 on miss.  The normal is the
    geometric normal (sphere: outward; quad: cross(eu, ev); plane: stored).
    """
    best_t = t_max
    best_i = -1
    for i in range(prim_kind.shape[0]):
        k = prim_kind[i]
        if k == SHAPE_SPHERE:
            t = _hit_sphere(
                prim_data[i, 0], prim_data[i, 1], prim_data[i, 2], prim_data[i, 3],
                ox, oy, oz, dx, dy, dz, t_min, best_t,
            )
        elif k == SHAPE_QUAD:
            t = _hit_quad(
                prim_data[i, 0], prim_data[i, 1], prim_data[i, 2],
                prim_data[i, 3], prim_data[i, 4], prim_data[i, 5],
                prim_data[i, 6], prim_data[i, 7], prim_data[i, 8],
                ox, oy, oz, dx, dy, dz, t_min, best_t,
            )
        else:
            t = _hit_plane(
                prim_data[i, 0], prim_data[i, 1], prim_data[i, 2],
                prim_data[i, 3], prim_data[i, 4], prim_data[i, 5],
                ox, oy, oz, dx, dy, dz, t_min, best_t,
            )
        if t > 0.0 and t < best_t:
            best_t = t
            best_i = i
    if best_i < 0:
        return -1.0, -1, 0.0, 0.0, 0.0
    i = best_i
    k = prim_kind[i]
    hx = ox + best_t * dx
    hy = oy + best_t * dy
    hz = oz + best_t * dz
    if k == SHAPE_SPHERE:
        inv_r = 1.0 / prim_data[i, 3]
        nx = (hx - prim_data[i, 0]) * inv_r
        ny = (hy - prim_data[i, 1]) * inv_r
        nz = (hz - prim_data[i, 2]) * inv_r
    elif k == SHAPE_QUAD:
        eux, euy, euz = prim_data[i, 3], prim_data[i, 4], prim_data[i, 5]
        evx, evy, evz = prim_data[i, 6], prim_data[i, 7], prim_data[i, 8]
        nx = euy * evz - euz * evy
        ny = euz * evx - eux * evz
        nz = eux * evy - euy * evx
        inv = 1.0 / math.sqrt(nx * nx + ny * ny + nz * nz)
        nx *= inv
        ny *= inv
        nz *= inv
    else:
        nx, ny, nz = prim_data[i, 3], prim_data[i, 4], prim_data[i, 5]
    return best_t, best_i, nx, ny, nz


@njit(cache=True, inline="always")
def occluded(prim_kind, prim_data, ox, oy, oz, dx, dy, dz, t_min, t_max):
    """Any-hit test for shadow rays."""
    for i in range(prim_kind.shape[0]):
        k = prim_kind[i]
        if k == SHAPE_SPHERE:
            t = _hit_sphere(
                prim_data[i, 0], prim_data[i, 1], prim_data[i, 2], prim_data[i, 3],
                ox, oy, oz, dx, dy, dz, t_min, t_max,
            )
        elif k == SHAPE_QUAD:
            t = _hit_quad(
                prim_data[i, 0], prim_data[i, 1], prim_data[i, 2],
                prim_data[i, 3], prim_data[i, 4], prim_data[i, 5],
                prim_data[i, 6], prim_data[i, 7], prim_data[i, 8],
                ox, oy, oz, dx, dy, dz, t_min, t_max,
            )
        else:
            t = _hit_plane(
                prim_data[i, 0], prim_data[i, 1], prim_data[i, 2],
                prim_data[i, 3], prim_data[i, 4], prim_data[i, 5],
                ox, oy, oz, dx, dy, dz, t_min, t_max,
            )
        if t > 0.0:
            return True
    return False
