"""HDR/LDR image containers, PFM and mask-PNG I/O, and LDR conversion.

PFM is the HDR interchange format: float32 payload, bit-exact roundtrip,
no codec dependencies.  Files are written little-endian (scale -1.0) with
scanlines bottom-to-top per the PFM convention; in memory the top row
comes first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image


class ImageFormatError(ValueError):
    """Malformed image file or payload."""


def _as_image_array(data, what: str) -> np.ndarray:
    a = np.asarray(data, dtype=np.float32)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3 or a.shape[2] not in (1, 3):
        raise ValueError(f"{what} must be HxW or HxWx{{1,3}}, got shape {a.shape}")
    return np.ascontiguousarray(a)


@dataclass
class HdrImage:
    """Float32 image, top row first.  NaNs are rejected; +/-inf is allowed
    so the container can also carry depth planes (infinite for env hits)."""

    data: np.ndarray  # (H, W, C) float32, C in {1, 3}

    def __init__(self, data):
        self.data = _as_image_array(data, "HdrImage")
        if np.isnan(self.data).any():
            raise ValueError("HdrImage payload contains NaN")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass
class LdrImage:
    """Float32 image with values in [0, 1]."""

    data: np.ndarray

    def __init__(self, data):
        self.data = _as_image_array(data, "LdrImage")
        if not np.isfinite(self.data).all():
            raise ValueError("LdrImage payload must be finite")
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise ValueError("LdrImage values must lie in [0, 1]")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def write_pfm(img: HdrImage, path) -> None:
    """Write a PF (3-channel) or Pf (1-channel) little-endian PFM file."""
    if np.isnan(img.data).any():
        raise ImageFormatError("refusing to write NaN payload to PFM")
    header = b"PF\n" if img.channels == 3 else b"Pf\n"
    payload = np.flipud(img.data)  # file stores the bottom row first
    if img.channels == 1:
        payload = payload[:, :, 0]
    with open(path, "wb") as f:
        f.write(header)
        f.write(f"{img.width} {img.height}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.ascontiguousarray(payload, dtype="<f4").tobytes())


def read_pfm(path) -> HdrImage:
    with open(path, "rb") as f:
        raw = f.read()

    def next_token(pos):
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PFM header")
        return raw[start:pos].decode("ascii", "replace"), pos

    magic, pos = next_token(0)
    if magic == "PF":
        channels = 3
    elif magic == "Pf":
        channels = 1
    else:
        raise ImageFormatError(f"{path}: not a PFM file (magic {magic!r})")
    w_tok, pos = next_token(pos)
    h_tok, pos = next_token(pos)
    s_tok, pos = next_token(pos)
    try:
        width, height, scale = int(w_tok), int(h_tok), float(s_tok)
    except ValueError as e:
        raise ImageFormatError(f"{path}: bad PFM header: {e}") from None
    if width <= 0 or height <= 0 or scale == 0.0:
        raise ImageFormatError(f"{path}: bad PFM dimensions/scale")
    pos += 1  # single whitespace byte after the scale line
    expected = width * height * channels * 4
    body = raw[pos : pos + expected]
    if len(body) != expected:
        raise ImageFormatError(
            f"{path}: payload has {len(body)} bytes, expected {expected}"
        )
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(body, dtype=dtype).astype(np.float32, copy=False)
    data = data.reshape(height, width, channels)
    return HdrImage(np.flipud(data))


def write_mask_png(mask: np.ndarray, path) -> None:
    """8-bit grayscale PNG: valid=255, invalid=0."""
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {m.shape}")
    Image.fromarray(np.where(m, 255, 0).astype(np.uint8), mode="L").save(path)


def read_mask_png(path) -> np.ndarray:
    img = Image.open(path).convert("L")
    return np.asarray(img, dtype=np.uint8) > 127


def tonemap(img: HdrImage, exposure: float, gamma: float) -> LdrImage:
    """clamp(exposure * hdr, 0, 1) ** (1 / gamma), componentwise."""
    if exposure <= 0.0:
        raise ValueError(f"exposure must be positive, got {exposure}")
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    if not np.isfinite(img.data).all():
        raise ValueError("tonemap input must be finite")
    out = np.clip(exposure * img.data.astype(np.float64), 0.0, 1.0) ** (1.0 / gamma)
    return LdrImage(out.astype(np.float32))
