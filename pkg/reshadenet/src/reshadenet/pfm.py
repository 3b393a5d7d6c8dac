"""Minimal readers for the dataset's on-disk formats (PFM + mask PNG).

Kept self-contained: this package consumes the renderer's outputs purely
through its documented file formats.
"""

import numpy as np
from PIL import Image


def read_pfm(path) -> np.ndarray:
    """Returns (H, W, C) float32, top row first; C is 1 or 3."""
    with open(path, "rb") as f:
        raw = f.read()

    def token(pos):
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PFM header")
        return raw[start:pos], pos

    magic, pos = token(0)
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise ValueError(f"{path}: not a PFM file")
    w, pos = token(pos)
    h, pos = token(pos)
    scale, pos = token(pos)
    width, height, scale = int(w), int(h), float(scale)
    pos += 1
    expected = width * height * channels * 4
    body = raw[pos : pos + expected]
    if len(body) != expected:
        raise ValueError(f"{path}: short PFM payload")
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(body, dtype=dtype).astype(np.float32, copy=False)
    return np.flipud(data.reshape(height, width, channels)).copy()


def read_mask(path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("L"), np.uint8) > 127
