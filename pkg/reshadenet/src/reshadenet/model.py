"""Residual reshading UNet.

Five average-pool downsampling levels to an H/32 x W/32 x 512 bottleneck,
a camera MLP whose 125-channel feature is concatenated with the raw
3-vector and replicated over the bottleneck (640 channels total), bilinear
upsampling with skip connections on the way up, and a tanh residual added
to the input image.  Ablation switches drop the disparity input, its
frequency encoding, or the camera MLP (raw vector concat, 515 channels).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, field

import torch
import torch.nn as nn
import torch.nn.functional as F

LEAKY_SLOPE = 0.1


@dataclass
class NetConfig:
    levels: int = 5
    encoder_channels: tuple[int, ...] = (64, 128, 256, 512, 512)
    bottleneck_channels: int = 512
    camera_feature_channels: int = 125
    use_disparity: bool = True
    use_frequency_encoding: bool = True
    use_camera_mlp: bool = True

    def __post_init__(self):
        self.encoder_channels = tuple(self.encoder_channels)
        if len(self.encoder_channels) != self.levels:
            raise ValueError("need one encoder width per level")

    @property
    def downsample_factor(self) -> int:
        return 2**self.levels

    @property
    def input_channels(self) -> int:
        if not self.use_disparity:
            return 3
        return 3 + (11 if self.use_frequency_encoding else 1)

    @property
    def camera_channels(self) -> int:
        # MLP feature concatenated with the raw offset; ablation keeps raw only
        return self.camera_feature_channels + 3 if self.use_camera_mlp else 3

    @property
    def concat_channels(self) -> int:
        return self.bottleneck_channels + self.camera_channels

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "NetConfig":
        obj = dict(obj)
        obj["encoder_channels"] = tuple(obj["encoder_channels"])
        return cls(**obj)


class CameraMLP(nn.Module):
    """3 -> 64 -> 128 -> 125, leaky activations, linear last layer; the raw
    offset is appended so the output is 128 channels."""

    def __init__(self, out_features: int = 125):
        super().__init__()
        self.fc1 = nn.Linear(3, 64)
        self.fc2 = nn.Linear(64, 128)
        self.fc3 = nn.Linear(128, out_features)

    def forward(self, offset: torch.Tensor) -> torch.Tensor:
        x = F.leaky_relu(self.fc1(offset), LEAKY_SLOPE)
        x = F.leaky_relu(self.fc2(x), LEAKY_SLOPE)
        x = self.fc3(x)
        return torch.cat([x, offset], dim=-1)


def _conv(cin, cout):
    return nn.Conv2d(cin, cout, kernel_size=3, padding=1)


class ReshadeUNet(nn.Module):
    def __init__(self, cfg: NetConfig | None = None):
        super().__init__()
        self.cfg = cfg or NetConfig()
        cfg = self.cfg
        widths = cfg.encoder_channels
        self.camera_mlp = CameraMLP(cfg.camera_feature_channels) if cfg.use_camera_mlp else None

        encs = []
        cin = cfg.input_channels
        for w in widths:
            encs.append(_conv(cin, w))
            cin = w
        self.encoder = nn.ModuleList(encs)
        self.bottleneck = _conv(widths[-1], cfg.bottleneck_channels)
        self.fuse = _conv(cfg.concat_channels, cfg.bottleneck_channels)

        dec_out = (512, 256, 128, 64, 64)
        decs = []
        cin = cfg.bottleneck_channels
        for skip_w, w in zip(reversed(widths), dec_out):
            decs.append(_conv(cin + skip_w, w))
            cin = w
        self.decoder = nn.ModuleList(decs)
        self.head = _conv(dec_out[-1], 3)

    def input_stack(self, image, encoding=None, disparity=None) -> torch.Tensor:
        cfg = self.cfg
        if not cfg.use_disparity:
            return image
        extra = encoding if cfg.use_frequency_encoding else disparity
        if extra is None:
            raise ValueError("disparity input required by this configuration")
        return torch.cat([image, extra], dim=1)

    def bottleneck_features(self, stack: torch.Tensor, offset: torch.Tensor):
        """Returns (concatenated bottleneck map, encoder skip features)."""
        b, _, h, w = stack.shape
        f = self.cfg.downsample_factor
        if h % f or w % f:
            raise ValueError(f"spatial dims must be divisible by {f}, got {h}x{w}")
        skips = []
        x = stack
        for conv in self.encoder:
            x = F.leaky_relu(conv(x), LEAKY_SLOPE)
            skips.append(x)
            x = F.avg_pool2d(x, 2)
        x = F.leaky_relu(self.bottleneck(x), LEAKY_SLOPE)
        cam = self.camera_mlp(offset) if self.camera_mlp is not None else offset
        cam = cam[:, :, None, None].expand(b, cam.shape[1], x.shape[2], x.shape[3])
        return torch.cat([x, cam], dim=1), skips

    def forward(self, image, offset, encoding=None, disparity=None) -> torch.Tensor:
        stack = self.input_stack(image, encoding, disparity)
        x, skips = self.bottleneck_features(stack, offset)
        x = F.leaky_relu(self.fuse(x), LEAKY_SLOPE)
        for conv, skip in zip(self.decoder, reversed(skips)):
            x = F.interpolate(x, scale_factor=2, mode="bilinear", align_corners=False)
            x = F.leaky_relu(conv(torch.cat([x, skip], dim=1)), LEAKY_SLOPE)
        residual = torch.tanh(self.head(x))
        return torch.clamp(image + residual, 0.0, 1.0)
