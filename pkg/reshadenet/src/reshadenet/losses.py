"""Training losses: masked L1 + VGG perceptual + Gram style.

Both images are multiplied by the validity mask before every term.  The
perceptual features come from VGG-19's conv4_4 output; when the pretrained
weights cannot be downloaded (offline), a fixed seeded random
initialization of the same architecture is used instead and recorded in
the checkpoint.  All terms are mean-reduced.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import torch
import torch.nn as nn

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)
_CONV4_4_INDEX = 26  # vgg19.features[:26] ends with the conv4_4 module
_FALLBACK_SEED = 0x5EED


@dataclass
class TrainConfig:
    lambda_l1: float = 1e-1
    lambda_vgg: float = 1e-2
    lambda_style: float = 1.0
    lr_high: float = 1e-4
    lr_low: float = 1e-5
    high_iters: int = 300_000
    total_iters: int = 500_000
    batch_size: int = 8
    crop: int = 384

    def __post_init__(self):
        if min(self.lambda_l1, self.lambda_vgg, self.lambda_style) < 0:
            raise ValueError("loss weights must be >= 0")
        if self.total_iters <= 0 or self.high_iters < 0:
            raise ValueError("iteration counts must be positive")

    def lr_at(self, iteration: int) -> float:
        return self.lr_high if iteration < self.high_iters else self.lr_low

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "TrainConfig":
        return cls(**obj)


class VggFeatures(nn.Module):
    """VGG-19 prefix through conv4_4, frozen."""

    def __init__(self, pretrained: bool = True):
        super().__init__()
        from torchvision.models import VGG19_Weights, vgg19

        self.pretrained = pretrained
        if pretrained:
            try:
                net = vgg19(weights=VGG19_Weights.IMAGENET1K_V1)
            except Exception:
                self.pretrained = False
                net = None
        if not self.pretrained:
            with torch.random.fork_rng():
                torch.manual_seed(_FALLBACK_SEED)
                net = vgg19(weights=None)
        self.features = net.features[:_CONV4_4_INDEX]
        for p in self.features.parameters():
            p.requires_grad_(False)
        self.register_buffer("mean", torch.tensor(_IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(_IMAGENET_STD).view(1, 3, 1, 1))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.features((x - self.mean) / self.std)


def gram_matrix(features: torch.Tensor) -> torch.Tensor:
    """(B, C, H, W) -> (B, C, C), normalized by C*H*W."""
    b, c, h, w = features.shape
    f = features.reshape(b, c, h * w)
    return f @ f.transpose(1, 2) / (c * h * w)


def masked_l1(pred: torch.Tensor, gt: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    m = mask.to(pred.dtype)
    return (m * pred - m * gt).abs().mean()


class ReshadeLoss(nn.Module):
    def __init__(self, cfg: TrainConfig | None = None, pretrained_vgg: bool = True):
        super().__init__()
        self.cfg = cfg or TrainConfig()
        self.vgg = VggFeatures(pretrained=pretrained_vgg)

    def forward(self, pred, gt, mask):
        """Returns (total, {l1, vgg, style}) with the mask applied first."""
        m = mask.to(pred.dtype)
        pred_m = pred * m
        gt_m = gt * m
        l1 = (pred_m - gt_m).abs().mean()
        fp = self.vgg(pred_m)
        fg = self.vgg(gt_m)
        vgg = ((fp - fg) ** 2).mean()
        style = ((gram_matrix(fp) - gram_matrix(fg)) ** 2).mean()
        total = self.cfg.lambda_l1 * l1 + self.cfg.lambda_vgg * vgg + self.cfg.lambda_style * style
        return total, {"l1": l1.item(), "vgg": vgg.item(), "style": style.item()}
