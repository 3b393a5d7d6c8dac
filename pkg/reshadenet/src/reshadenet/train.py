"""Seeded training loop with Adam, the two-stage LR schedule, and atomic
checkpoints."""

from __future__ import annotations

import json
import os

import numpy as np
import torch

from .data import AugmentConfig, load_manifest, make_batch
from .losses import ReshadeLoss, TrainConfig, masked_l1
from .model import NetConfig, ReshadeUNet


def save_checkpoint(path, model: ReshadeUNet, iteration: int, pretrained_vgg: bool):
    tmp = f"{path}.tmp"
    torch.save(
        {
            "model": model.state_dict(),
            "net_config": model.cfg.to_json(),
            "iteration": iteration,
            "pretrained_vgg": pretrained_vgg,
        },
        tmp,
    )
    os.replace(tmp, path)


def load_checkpoint(path) -> tuple[ReshadeUNet, dict]:
    ckpt = torch.load(path, map_location="cpu", weights_only=False)
    model = ReshadeUNet(NetConfig.from_json(ckpt["net_config"]))
    model.load_state_dict(ckpt["model"])
    model.eval()
    return model, ckpt


def train(
    manifest_path: str,
    out_dir: str,
    net_cfg: NetConfig | None = None,
    train_cfg: TrainConfig | None = None,
    seed: int = 0,
    log_every: int = 50,
    checkpoint_every: int = 1000,
    examples=None,
) -> tuple[str, list[dict]]:
    """Returns (final checkpoint path, loss log).  Fully seeded; a
    zero-iteration run checkpoints the initialization as-is."""
    net_cfg = net_cfg or NetConfig()
    train_cfg = train_cfg or TrainConfig()
    os.makedirs(out_dir, exist_ok=True)
    if examples is None:
        examples = load_manifest(manifest_path)
    aug = AugmentConfig(crop=train_cfg.crop)

    torch.manual_seed(seed)
    model = ReshadeUNet(net_cfg)
    model.train()
    loss_fn = ReshadeLoss(train_cfg)
    rng = np.random.default_rng(seed)
    opt = torch.optim.Adam(model.parameters(), lr=train_cfg.lr_high)

    log: list[dict] = []
    final_path = os.path.join(out_dir, "final.pt")
    for it in range(train_cfg.total_iters):
        lr = train_cfg.lr_at(it)
        for group in opt.param_groups:
            group["lr"] = lr
        batch = make_batch(examples, rng, aug, train_cfg.batch_size)
        pred = model(
            batch["input"], batch["offset"],
            encoding=batch["encoding"], disparity=batch["disparity"],
        )
        total, terms = loss_fn(pred, batch["target"], batch["mask"])
        if not torch.isfinite(total):
            dump = {"iteration": it, "lr": lr, **terms}
            raise RuntimeError(f"non-finite loss, aborting: {json.dumps(dump)}")
        opt.zero_grad()
        total.backward()
        opt.step()
        entry = {
            "iteration": it,
            "total": float(total.item()),
            "masked_l1": float(masked_l1(pred.detach(), batch["target"], batch["mask"]).item()),
            **terms,
        }
        log.append(entry)
        if log_every and it % log_every == 0:
            print(f"iter {it:6d}  lr {lr:.1e}  total {entry['total']:.5f}  l1 {entry['l1']:.5f}")
        if checkpoint_every and it > 0 and it % checkpoint_every == 0:
            save_checkpoint(os.path.join(out_dir, f"iter_{it:07d}.pt"), model, it, loss_fn.vgg.pretrained)
    save_checkpoint(final_path, model, train_cfg.total_iters, loss_fn.vgg.pretrained)
    with open(os.path.join(out_dir, "loss_log.json"), "w", encoding="utf-8") as f:
        json.dump(log, f)
    return final_path, log
