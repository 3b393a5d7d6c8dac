"""Network-input preparation, photometric augmentation, and metrics.

Depth becomes clamped scaled disparity (min(1/(4 d), 1), so [0.25 m, inf)
maps onto [0, 1]), which is lifted to 11 channels by sinusoidal frequency
encoding.  Training pairs get a shared exposure/gamma LDR conversion, a
random crop, and the disparity-vs-camera scale trade (d * f, offset / f).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image_io import HdrImage, LdrImage, tonemap

NUM_FREQUENCIES = 5
ENCODED_CHANNELS = 1 + 2 * NUM_FREQUENCIES  # original + 5 sines + 5 cosines


def depth_to_disparity(depth: np.ndarray) -> np.ndarray:
    """d = min(1 / (4 * depth), 1); depth must be positive (+inf allowed)."""
    depth = np.asarray(depth, np.float64)
    if np.isnan(depth).any() or (depth <= 0.0).any():
        raise ValueError("depth values must be positive (or +inf)")
    with np.errstate(divide="ignore"):
        d = 1.0 / (4.0 * depth)
    return np.minimum(d, 1.0)


def frequency_encode(d: np.ndarray) -> np.ndarray:
    """Per pixel: [d, sin(2^0 pi d), cos(2^0 pi d), ..., sin(2^4 pi d), cos(2^4 pi d)]."""
    d = np.asarray(d, np.float64)
    if d.min() < 0.0 or d.max() > 1.0:
        raise ValueError("disparity must lie in [0, 1]")
    channels = [d]
    for k in range(NUM_FREQUENCIES):
        arg = (2.0**k) * math.pi * d
        channels.append(np.sin(arg))
        channels.append(np.cos(arg))
    return np.stack(channels, axis=-1)


def masked_l1(pred: LdrImage | np.ndarray, gt: LdrImage | np.ndarray, mask: np.ndarray) -> float:
    """Mean |mask*pred - mask*gt| over all pixels and channels."""
    p = pred.data if isinstance(pred, LdrImage) else np.asarray(pred, np.float64)
    g = gt.data if isinstance(gt, LdrImage) else np.asarray(gt, np.float64)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    m = np.asarray(mask, bool)
    if m.shape != p.shape[:2]:
        raise ValueError(f"mask shape {m.shape} does not match image {p.shape}")
    mf = m.astype(np.float64)
    if p.ndim == 3:
        mf = mf[:, :, None]
    return float(np.mean(np.abs(mf * p.astype(np.float64) - mf * g.astype(np.float64))))


PSNR_CAP_DB = 99.0


def psnr(a: LdrImage | np.ndarray, b: LdrImage | np.ndarray) -> float:
    """10 log10(1 / MSE) for [0, 1] images, capped at 99 dB."""
    x = a.data if isinstance(a, LdrImage) else np.asarray(a, np.float64)
    y = b.data if isinstance(b, LdrImage) else np.asarray(b, np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((x.astype(np.float64) - y.astype(np.float64)) ** 2))
    if mse <= 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP_DB)


@dataclass(frozen=True)
class AugmentConfig:
    exposure_range: tuple[float, float] = (3.0, 10.0)
    gamma_range: tuple[float, float] = (2.2, 5.0)
    scale_range: tuple[float, float] = (0.5, 2.0)  # f, drawn log-uniform
    crop: int = 384

    def __post_init__(self):
        for name in ("exposure_range", "gamma_range", "scale_range"):
            lo, hi = getattr(self, name)
            if not (0.0 < lo <= hi):
                raise ValueError(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
        if self.crop < 1:
            raise ValueError("crop must be positive")


@dataclass
class TrainSample:
    input_ldr: np.ndarray  # (crop, crop, 3) in [0, 1]
    encoded_disparity: np.ndarray  # (crop, crop, 11)
    camera_vec: np.ndarray  # (3,) novel offset scaled by 1/f
    target_ldr: np.ndarray  # (crop, crop, 3)
    mask: np.ndarray  # (crop, crop) bool


def augment_pair(
    input_hdr: np.ndarray,
    reshaded_hdr: np.ndarray,
    depth: np.ndarray,
    validity: np.ndarray,
    novel_offset,
    rng: np.random.Generator,
    cfg: AugmentConfig = AugmentConfig(),
) -> TrainSample:
    """One training sample: co-located crop, shared exposure/gamma on both
    images, disparity scaled by f with the camera vector scaled by 1/f."""
    h, w = depth.shape
    if h < cfg.crop or w < cfg.crop:
        raise ValueError(f"image {w}x{h} smaller than crop {cfg.crop}")
    y0 = int(rng.integers(0, h - cfg.crop + 1))
    x0 = int(rng.integers(0, w - cfg.crop + 1))
    exposure = float(rng.uniform(*cfg.exposure_range))
    gamma = float(rng.uniform(*cfg.gamma_range))
    lo, hi = cfg.scale_range
    f = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    sl = np.s_[y0 : y0 + cfg.crop, x0 : x0 + cfg.crop]
    inp = tonemap(HdrImage(np.asarray(input_hdr)[sl]), exposure, gamma).data
    tgt = tonemap(HdrImage(np.asarray(reshaded_hdr)[sl]), exposure, gamma).data
    disparity = np.minimum(depth_to_disparity(np.asarray(depth)[sl]) * f, 1.0)
    return TrainSample(
        input_ldr=inp,
        encoded_disparity=frequency_encode(disparity),
        camera_vec=np.asarray(novel_offset, np.float64) / f,
        target_ldr=tgt,
        mask=np.asarray(validity, bool)[sl],
    )
