"""Per-pixel descriptor extraction from RGB images.

Two implementations share one contract: produce a patch-level feature grid
and bilinearly upsample it to pixel resolution, L2-normalizing every pixel
vector (the downstream correspondence math assumes unit-ish descriptors).

- ``PatchProjectionBackbone`` needs no model weights: patch statistics
  (mean color, gradient energy, position-free local contrast) pass through
  a fixed seeded random projection. Deterministic, fast, good enough to
  exercise the full pipeline and its tests.
- ``Dinov2Backbone`` runs a DINOv2 checkpoint via `transformers` (weights
  fetched by scripts/fetch_weights.py). Loading problems raise
  ``ModelLoadError``.
"""

from __future__ import annotations

import numpy as np


class ModelLoadError(RuntimeError):
    """A foundation-model checkpoint could not be loaded."""


def _as_float_rgb(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    if arr.dtype == np.uint8:
        arr = arr.astype(np.float64) / 255.0
    return arr[:, :, :3].astype(np.float64)


def bilinear_upsample(grid: np.ndarray, height: int, width: int) -> np.ndarray:
    """Resize a (gh, gw, C) grid to (height, width, C), patch centers aligned."""
    gh, gw, c = grid.shape
    ys = (np.arange(height) + 0.5) / height * gh - 0.5
    xs = (np.arange(width) + 0.5) / width * gw - 0.5
    ys = np.clip(ys, 0, gh - 1)
    xs = np.clip(xs, 0, gw - 1)
    y0 = np.minimum(np.floor(ys).astype(int), gh - 2) if gh > 1 else np.zeros(height, int)
    x0 = np.minimum(np.floor(xs).astype(int), gw - 2) if gw > 1 else np.zeros(width, int)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    g = grid
    out = ((1 - fy) * ((1 - fx) * g[y0][:, x0] + fx * g[y0][:, x0 + 1])
           + fy * ((1 - fx) * g[y0 + 1][:, x0] + fx * g[y0 + 1][:, x0 + 1]))
    return out


def unit_normalize(features: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(features, axis=-1, keepdims=True)
    return np.where(norms > 1e-12, features / np.maximum(norms, 1e-12), 0.0)


class PatchProjectionBackbone:
    """Weight-free descriptor extractor: patch statistics through a fixed
    seeded projection."""

    name = "patch-projection"

    def __init__(self, dim: int = 32, patch: int = 8, seed: int = 0):
        self.dim = dim
        self.patch = patch
        rng = np.random.default_rng(seed)
        # stats: mean rgb (3), gradient energy (2), local contrast (3)
        self._proj = rng.standard_normal((dim, 8)) / np.sqrt(8.0)

    def _patch_stats(self, rgb: np.ndarray) -> np.ndarray:
        h, w, _ = rgb.shape
        p = self.patch
        gh, gw = max(h // p, 1), max(w // p, 1)
        crop = rgb[: gh * p, : gw * p]
        blocks = crop.reshape(gh, p, gw, p, 3)
        mean = blocks.mean(axis=(1, 3))
        gy = np.abs(np.diff(crop, axis=0)).mean(axis=-1)
        gx = np.abs(np.diff(crop, axis=1)).mean(axis=-1)
        gye = _block_mean(gy, gh, gw, p)
        gxe = _block_mean(gx, gh, gw, p)
        contrast = blocks.std(axis=(1, 3))
        return np.concatenate([mean, gye[:, :, None], gxe[:, :, None], contrast],
                              axis=2)

    def features(self, rgb) -> np.ndarray:
        arr = _as_float_rgb(rgb)
        stats = self._patch_stats(arr)
        grid = stats @ self._proj.T
        up = bilinear_upsample(grid, arr.shape[0], arr.shape[1])
        return unit_normalize(up).astype(np.float32)


def _block_mean(img: np.ndarray, gh: int, gw: int, p: int) -> np.ndarray:
    """Mean-pool an image onto a (gh, gw) grid of p x p patches (edges padded)."""
    h = gh * p
    w = gw * p
    padded = np.zeros((h, w))
    ch = min(img.shape[0], h)
    cw = min(img.shape[1], w)
    padded[:ch, :cw] = img[:ch, :cw]
    return padded.reshape(gh, p, gw, p).mean(axis=(1, 3))


class Dinov2Backbone:
    """DINOv2 patch tokens projected to the target dimension and upsampled.

    The checkpoint must be available locally (see scripts/fetch_weights.py);
    the hidden dimension is reduced to `dim` by a fixed seeded projection so
    scene directories stay compatible with whatever N the consumer declares.
    """

    name = "dinov2"

    def __init__(self, dim: int = 32, model_name: str = "facebook/dinov2-small",
                 device: str = "cpu", seed: int = 0):
        self.dim = dim
        self.device = device
        try:
            import torch
            from transformers import AutoImageProcessor, AutoModel
        except ImportError as e:
            raise ModelLoadError(
                "torch/transformers are not installed; install the [models] extra"
            ) from e
        try:
            self._processor = AutoImageProcessor.from_pretrained(model_name)
            self._model = AutoModel.from_pretrained(model_name).to(device).eval()
        except Exception as e:
            raise ModelLoadError(
                f"cannot load {model_name}; fetch weights with scripts/fetch_weights.py"
            ) from e
        self._torch = torch
        rng = np.random.default_rng(seed)
        hidden = self._model.config.hidden_size
        self._proj = rng.standard_normal((dim, hidden)) / np.sqrt(hidden)

    def features(self, rgb) -> np.ndarray:
        arr = (_as_float_rgb(rgb) * 255).astype(np.uint8)
        inputs = self._processor(images=arr, return_tensors="pt").to(self.device)
        with self._torch.no_grad():
            out = self._model(**inputs).last_hidden_state[0]
        tokens = out[1:].cpu().numpy()  # drop CLS
        side = int(np.sqrt(tokens.shape[0]))
        grid = tokens[: side * side].reshape(side, side, -1) @ self._proj.T
        up = bilinear_upsample(grid, arr.shape[0], arr.shape[1])
        return unit_normalize(up).astype(np.float32)


BACKBONES = {
    "patch-projection": PatchProjectionBackbone,
    "dinov2": Dinov2Backbone,
}
