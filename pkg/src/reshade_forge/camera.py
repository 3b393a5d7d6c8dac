"""Pinhole camera model shared by the tracer and the warping demo.

Conventions: continuous pixel coordinates (u, v) live in [0, W] x [0, H]
with (0, 0) at the top-left corner, so the center of integer pixel (i, j)
is (i + 0.5, j + 0.5).  The camera looks along +forward; the stored depth
is planar z-depth, i.e. the distance along the forward axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = tuple[float, float, float]


def _vec3(v) -> Vec3:
    x, y, z = (float(c) for c in v)
    return (x, y, z)


@dataclass(frozen=True)
class PinholeCamera:
    position: Vec3
    look_at: Vec3
    up: Vec3
    vertical_fov: float  # radians
    width: int
    height: int

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        object.__setattr__(self, "look_at", _vec3(self.look_at))
        object.__setattr__(self, "up", _vec3(self.up))
        if not 0.0 < self.vertical_fov < math.pi:
            raise ValueError(f"vertical_fov must be in (0, pi), got {self.vertical_fov}")
        if self.width < 1 or self.height < 1:
            raise ValueError("camera resolution must be at least 1x1")
        fwd = np.asarray(self.look_at, float) - np.asarray(self.position, float)
        if np.linalg.norm(fwd) < 1e-12:
            raise ValueError("look_at must differ from position")

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (right, up, forward), forward toward look_at."""
        pos = np.asarray(self.position, float)
        fwd = np.asarray(self.look_at, float) - pos
        fwd /= np.linalg.norm(fwd)
        right = np.cross(fwd, np.asarray(self.up, float))
        n = np.linalg.norm(right)
        if n < 1e-9:
            # up parallel to view direction; pick any perpendicular axis
            alt = np.array([1.0, 0.0, 0.0]) if abs(fwd[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
            right = np.cross(fwd, alt)
            n = np.linalg.norm(right)
        right /= n
        up = np.cross(right, fwd)
        return right, up, fwd

    @property
    def tan_half_fov(self) -> float:
        return math.tan(0.5 * self.vertical_fov)

    @property
    def aspect(self) -> float:
        return self.width / self.height

    @property
    def focal_px(self) -> float:
        """Focal length in pixels (square pixels: same for both axes)."""
        return 0.5 * self.height / self.tan_half_fov

    def ray_direction(self, u: float, v: float) -> np.ndarray:
        """Unit world-space direction through continuous pixel (u, v)."""
        right, up, fwd = self.basis()
        x = (2.0 * u / self.width - 1.0) * self.tan_half_fov * self.aspect
        y = (1.0 - 2.0 * v / self.height) * self.tan_half_fov
        d = fwd + x * right + y * up
        return d / np.linalg.norm(d)

    def to_json(self) -> dict:
        return {
            "position": list(self.position),
            "look_at": list(self.look_at),
            "up": list(self.up),
            "fov_deg": math.degrees(self.vertical_fov),
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PinholeCamera":
        return cls(
            position=_vec3(obj["position"]),
            look_at=_vec3(obj["look_at"]),
            up=_vec3(obj["up"]),
            vertical_fov=math.radians(float(obj["fov_deg"])),
            width=int(obj["width"]),
            height=int(obj["height"]),
        )


def unproject(pixel: tuple[float, float], depth: float, cam: PinholeCamera) -> np.ndarray:
    """World point at planar depth `depth` along the ray through `pixel`."""
    if not math.isfinite(depth) or depth <= 0.0:
        raise ValueError(f"depth must be finite and positive, got {depth}")
    u, v = pixel
    right, up, fwd = cam.basis()
    x = (2.0 * u / cam.width - 1.0) * cam.tan_half_fov * cam.aspect
    y = (1.0 - 2.0 * v / cam.height) * cam.tan_half_fov
    return np.asarray(cam.position, float) + depth * (fwd + x * right + y * up)


def project(point, cam: PinholeCamera) -> tuple[float, float] | None:
    """Continuous pixel coordinates of a world point, None if behind camera."""
    right, up, fwd = cam.basis()
    q = np.asarray(point, float) - np.asarray(cam.position, float)
    z = float(q @ fwd)
    if z <= 0.0:
        return None
    x = float(q @ right) / (z * cam.tan_half_fov * cam.aspect)
    y = float(q @ up) / (z * cam.tan_half_fov)
    return ((x + 1.0) * 0.5 * cam.width, (1.0 - y) * 0.5 * cam.height)
