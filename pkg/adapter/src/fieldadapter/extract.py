"""Turn calibrated RGBD captures into scene directories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sceneio
from .backbones import BACKBONES
from .propagate import PROPAGATORS
from .segment import SEGMENTERS


@dataclass
class ExtractConfig:
    prompts: tuple = ()
    dim: int = 32
    patch: int = 8
    backbone: str = "patch-projection"
    segmenter: str = "color-regions"
    propagator: str = "iou"
    device: str = "cpu"
    video: bool = False
    mu: float = 0.02
    delta: float = 1e-4
    seed: int = 0
    backbone_kwargs: dict = field(default_factory=dict)


def _build_backbone(cfg: ExtractConfig):
    cls = BACKBONES[cfg.backbone]
    if cfg.backbone == "patch-projection":
        return cls(dim=cfg.dim, patch=cfg.patch, seed=cfg.seed, **cfg.backbone_kwargs)
    return cls(dim=cfg.dim, device=cfg.device, **cfg.backbone_kwargs)


def _build_segmenter(cfg: ExtractConfig):
    cls = SEGMENTERS[cfg.segmenter]
    if cfg.segmenter == "grounded-sam":
        return cls(device=cfg.device)
    return cls()


def extract_views(rgbs, depths, cameras, cfg: ExtractConfig):
    """Per-view feature maps and instance-id maps, ready for writing.

    cameras: list of dicts with `intrinsics` {fx, fy, cx, cy, width, height},
    `rotation` (row-major world-to-camera 3x3), `translation` (3,).
    Raises ValueError when image sizes disagree across modalities.
    """
    if not (len(rgbs) == len(depths) == len(cameras)):
        raise ValueError("rgb, depth, and camera counts must match")
    backbone = _build_backbone(cfg)
    segmenter = _build_segmenter(cfg)
    views = []
    for rgb, depth, cam in zip(rgbs, depths, cameras):
        rgb_arr = np.asarray(rgb)
        depth_arr = np.asarray(depth, dtype=np.float64)
        if rgb_arr.shape[:2] != depth_arr.shape:
            raise ValueError(f"rgb {rgb_arr.shape[:2]} vs depth {depth_arr.shape} size mismatch")
        intr = cam["intrinsics"]
        if depth_arr.shape != (intr["height"], intr["width"]):
            raise ValueError("camera intrinsics do not match the image size")
        feats = backbone.features(rgb_arr)
        ids = segmenter.masks(rgb_arr, prompts=cfg.prompts, depth=depth_arr,
                              camera=cam)
        views.append({"intrinsics": intr, "rotation": cam["rotation"],
                      "translation": cam["translation"], "depth": depth_arr,
                      "features": feats, "mask_ids": ids})
    return views


def extract_frame(rgbs, depths, cameras, cfg: ExtractConfig, out_path):
    """One multi-view frame -> one scene directory on disk."""
    views = extract_views(rgbs, depths, cameras, cfg)
    sceneio.write_scene(out_path, views, mu=cfg.mu, delta=cfg.delta)
    return out_path


def propagate_masks(frames, cfg: ExtractConfig, out_root,
                    initial_ids=None):
    """Video mode: write one scene directory per frame with temporally
    consistent instance ids.

    frames: list of (rgbs, depths, cameras) triples. `initial_ids` can
    override the first frame's per-view segmentation. Returns
    (paths, diverged) where `diverged` maps frame index to the ids that
    lost support there.
    """
    from pathlib import Path

    propagator = PROPAGATORS[cfg.propagator]()
    paths = []
    diverged: dict = {}
    prev: list = []
    for fi, (rgbs, depths, cameras) in enumerate(frames):
        views = extract_views(rgbs, depths, cameras, cfg)
        if fi == 0 and initial_ids is not None:
            for view, ids in zip(views, initial_ids):
                view["mask_ids"] = np.asarray(ids, dtype=np.uint8)
        if fi > 0:
            lost: set = set()
            for vi, view in enumerate(views):
                relabeled, missing = propagator.propagate(prev[vi], view["mask_ids"])
                view["mask_ids"] = relabeled.astype(np.uint8)
                lost.update(missing)
            if lost:
                diverged[fi] = sorted(lost)
        prev = [view["mask_ids"] for view in views]
        path = Path(out_root) / f"frame_{fi:04d}"
        sceneio.write_scene(path, views, mu=cfg.mu, delta=cfg.delta)
        paths.append(path)
    return paths, diverged
