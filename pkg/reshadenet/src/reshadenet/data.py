"""Dataset loading and training-time augmentation.

Each example directory holds input.pfm / reshaded.pfm / depth.pfm /
validity.png plus meta.json with the camera-axes novel offset.  Training
samples are random crops with a shared exposure/gamma LDR conversion and
the disparity-vs-camera scale trade (disparity * f, offset / f).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np
import torch

from .pfm import read_mask, read_pfm

NUM_FREQUENCIES = 5
ENCODED_CHANNELS = 1 + 2 * NUM_FREQUENCIES


def depth_to_disparity(depth: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.minimum(1.0 / (4.0 * depth), 1.0)


def frequency_encode(d: np.ndarray) -> np.ndarray:
    """(H, W) -> (H, W, 11): [d, sin/cos of 2^k pi d for k = 0..4]."""
    chans = [d]
    for k in range(NUM_FREQUENCIES):
        arg = (2.0**k) * math.pi * d
        chans.append(np.sin(arg))
        chans.append(np.cos(arg))
    return np.stack(chans, axis=-1).astype(np.float32)


def tonemap(hdr: np.ndarray, exposure: float, gamma: float) -> np.ndarray:
    return np.clip(exposure * hdr, 0.0, 1.0) ** (1.0 / gamma)


@dataclass
class Example:
    input_hdr: np.ndarray  # (H, W, 3)
    reshaded_hdr: np.ndarray
    disparity: np.ndarray  # (H, W) in [0, 1], pre-scale
    validity: np.ndarray  # (H, W) bool
    offset: np.ndarray  # (3,) camera-axes novel offset


@dataclass
class AugmentConfig:
    crop: int = 384
    exposure_range: tuple[float, float] = (3.0, 10.0)
    gamma_range: tuple[float, float] = (2.2, 5.0)
    scale_range: tuple[float, float] = (0.5, 2.0)  # f drawn log-uniform


def load_manifest(path: str) -> list[Example]:
    root = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as f:
        records = json.load(f)
    examples = []
    for meta in records:
        pair = meta["example_id"].rsplit("-", 1)[1]
        d = os.path.join(root, meta["scene_id"], f"pair_{pair}")
        depth = read_pfm(os.path.join(d, "depth.pfm"))[:, :, 0]
        examples.append(
            Example(
                input_hdr=read_pfm(os.path.join(d, "input.pfm")),
                reshaded_hdr=read_pfm(os.path.join(d, "reshaded.pfm")),
                disparity=depth_to_disparity(depth),
                validity=read_mask(os.path.join(d, "validity.png")),
                offset=np.asarray(meta["novel_offset"], np.float32),
            )
        )
    if not examples:
        raise ValueError(f"{path}: empty manifest")
    return examples


def augment(ex: Example, rng: np.random.Generator, cfg: AugmentConfig):
    """One training sample as torch tensors (CHW images)."""
    h, w = ex.disparity.shape
    if h < cfg.crop or w < cfg.crop:
        raise ValueError(f"example {w}x{h} smaller than crop {cfg.crop}")
    y0 = int(rng.integers(0, h - cfg.crop + 1))
    x0 = int(rng.integers(0, w - cfg.crop + 1))
    exposure = float(rng.uniform(*cfg.exposure_range))
    gamma = float(rng.uniform(*cfg.gamma_range))
    lo, hi = cfg.scale_range
    f = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    sl = np.s_[y0 : y0 + cfg.crop, x0 : x0 + cfg.crop]

    inp = tonemap(ex.input_hdr[sl], exposure, gamma)
    tgt = tonemap(ex.reshaded_hdr[sl], exposure, gamma)
    disp = np.minimum(ex.disparity[sl] * f, 1.0)
    return {
        "input": torch.from_numpy(inp.transpose(2, 0, 1).copy()).float(),
        "target": torch.from_numpy(tgt.transpose(2, 0, 1).copy()).float(),
        "encoding": torch.from_numpy(frequency_encode(disp).transpose(2, 0, 1).copy()),
        "disparity": torch.from_numpy(disp[None].copy()).float(),
        "offset": torch.from_numpy(ex.offset / f).float(),
        "mask": torch.from_numpy(ex.validity[sl][None].copy()),
    }


def make_batch(examples, rng: np.random.Generator, cfg: AugmentConfig, batch_size: int):
    picks = rng.integers(0, len(examples), size=batch_size)
    samples = [augment(examples[i], rng, cfg) for i in picks]
    return {k: torch.stack([s[k] for s in samples]) for k in samples[0]}
