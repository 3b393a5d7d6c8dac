"""Inference on arbitrary-size images: reflect-pad to a /32 multiple,
run the network, crop back."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from .data import depth_to_disparity, frequency_encode
from .model import ReshadeUNet


def reshade_image(
    model: ReshadeUNet, image: np.ndarray, depth: np.ndarray, offset
) -> np.ndarray:
    """image: (H, W, 3) in [0, 1]; depth: (H, W) meters (+inf allowed).
    Returns the reshaded image at the original resolution."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected HxWx3 image, got {image.shape}")
    if depth.shape != image.shape[:2]:
        raise ValueError("depth resolution must match the image")
    h, w = depth.shape
    f = model.cfg.downsample_factor
    pad_h = (-h) % f
    pad_w = (-w) % f

    disp = np.minimum(depth_to_disparity(depth.astype(np.float64)), 1.0)
    img_t = torch.from_numpy(image.transpose(2, 0, 1)[None].copy()).float()
    enc_t = torch.from_numpy(frequency_encode(disp).transpose(2, 0, 1)[None].copy())
    disp_t = torch.from_numpy(disp[None, None].copy()).float()
    pad = (0, pad_w, 0, pad_h)
    img_t = F.pad(img_t, pad, mode="reflect")
    enc_t = F.pad(enc_t, pad, mode="reflect")
    disp_t = F.pad(disp_t, pad, mode="reflect")
    off_t = torch.as_tensor(np.asarray(offset, np.float32))[None]

    with torch.no_grad():
        out = model(img_t, off_t, encoding=enc_t, disparity=disp_t)
    return out[0, :, :h, :w].numpy().transpose(1, 2, 0)
