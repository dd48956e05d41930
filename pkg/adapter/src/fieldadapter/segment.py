"""Instance segmentation into per-pixel id maps.

``ColorRegionSegmenter`` is the weight-free default: the background color
is estimated from the image border, foreground pixels are grouped by
4-connected components, and components are ordered into stable instance
ids by their back-projected world centroid when depth and a camera are
available (image centroid otherwise). ``GroundedSamSegmenter`` chains
Grounding-DINO detection with SAM mask refinement via `transformers`.
"""

from __future__ import annotations

import numpy as np

from .backbones import ModelLoadError, _as_float_rgb


def connected_components(mask: np.ndarray) -> list[np.ndarray]:
    """4-connected components of a boolean mask, flood fill without recursion."""
    remaining = mask.copy()
    comps = []
    h, w = mask.shape
    while remaining.any():
        seed = np.unravel_index(np.argmax(remaining), remaining.shape)
        comp = np.zeros_like(mask)
        stack = [seed]
        remaining[seed] = False
        comp[seed] = True
        while stack:
            y, x = stack.pop()
            for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                if 0 <= ny < h and 0 <= nx < w and remaining[ny, nx]:
                    remaining[ny, nx] = False
                    comp[ny, nx] = True
                    stack.append((ny, nx))
        comps.append(comp)
    return comps


class ColorRegionSegmenter:
    """Foreground-by-color segmentation with component ordering."""

    name = "color-regions"

    def __init__(self, color_threshold: float = 0.12, min_pixels: int = 40):
        self.color_threshold = color_threshold
        self.min_pixels = min_pixels

    def masks(self, rgb, prompts=None, depth=None, camera=None) -> np.ndarray:
        """Return an HxW uint8 id map (0 background). `prompts` are accepted
        for interface parity; the color heuristic cannot interpret them and
        detects all salient regions."""
        arr = _as_float_rgb(rgb)
        h, w, _ = arr.shape
        border = np.concatenate([arr[0], arr[-1], arr[:, 0], arr[:, -1]])
        background = np.median(border, axis=0)
        dist = np.linalg.norm(arr - background, axis=2)
        fg = dist > self.color_threshold
        comps = [c for c in connected_components(fg) if c.sum() >= self.min_pixels]
        comps.sort(key=lambda c: _component_key(c, depth, camera))
        ids = np.zeros((h, w), dtype=np.uint8)
        for i, comp in enumerate(comps[:254], start=1):
            ids[comp] = i
        return ids


def _component_key(comp: np.ndarray, depth, camera) -> tuple:
    ys, xs = np.nonzero(comp)
    if depth is not None and camera is not None:
        z = np.asarray(depth)[ys, xs]
        ok = z > 0
        if ok.any():
            intr = camera["intrinsics"]
            cam_pts = np.stack([(xs[ok] - intr["cx"]) / intr["fx"] * z[ok],
                                (ys[ok] - intr["cy"]) / intr["fy"] * z[ok],
                                z[ok]], axis=1)
            R = np.asarray(camera["rotation"])
            t = np.asarray(camera["translation"])
            world = (cam_pts - t) @ R
            cx, cy, _ = world.mean(axis=0)
            return (round(cx, 3), round(cy, 3))
    return (round(xs.mean() / 1000.0, 3), round(ys.mean() / 1000.0, 3))


class GroundedSamSegmenter:
    """Open-vocabulary detection (Grounding-DINO) + SAM mask refinement."""

    name = "grounded-sam"

    def __init__(self, device: str = "cpu",
                 detector: str = "IDEA-Research/grounding-dino-tiny",
                 sam: str = "facebook/sam-vit-base",
                 box_threshold: float = 0.3):
        try:
            import torch
            from transformers import (AutoProcessor, GroundingDinoForObjectDetection,
                                      SamModel, SamProcessor)
        except ImportError as e:
            raise ModelLoadError(
                "torch/transformers are not installed; install the [models] extra"
            ) from e
        try:
            self._det_proc = AutoProcessor.from_pretrained(detector)
            self._det = GroundingDinoForObjectDetection.from_pretrained(detector)
            self._det = self._det.to(device).eval()
            self._sam_proc = SamProcessor.from_pretrained(sam)
            self._sam = SamModel.from_pretrained(sam).to(device).eval()
        except Exception as e:
            raise ModelLoadError(
                "cannot load detector/SAM weights; run scripts/fetch_weights.py"
            ) from e
        self._torch = torch
        self.device = device
        self.box_threshold = box_threshold

    def masks(self, rgb, prompts, depth=None, camera=None) -> np.ndarray:
        from PIL import Image

        arr = (_as_float_rgb(rgb) * 255).astype(np.uint8)
        image = Image.fromarray(arr)
        text = ". ".join(prompts) + "."
        inputs = self._det_proc(images=image, text=text, return_tensors="pt")
        with self._torch.no_grad():
            out = self._det(**{k: v.to(self.device) for k, v in inputs.items()})
        target = self._torch.tensor([arr.shape[:2]])
        results = self._det_proc.post_process_grounded_object_detection(
            out, inputs["input_ids"], box_threshold=self.box_threshold,
            target_sizes=target)[0]
        ids = np.zeros(arr.shape[:2], dtype=np.uint8)
        boxes = results["boxes"].cpu().numpy()
        order = np.argsort(boxes[:, 0]) if len(boxes) else []
        for i, bi in enumerate(order[:254], start=1):
            box = boxes[bi].tolist()
            sam_in = self._sam_proc(image, input_boxes=[[box]], return_tensors="pt")
            with self._torch.no_grad():
                sam_out = self._sam(**{k: v.to(self.device) for k, v in sam_in.items()})
            mask = self._sam_proc.image_processor.post_process_masks(
                sam_out.pred_masks.cpu(), sam_in["original_sizes"],
                sam_in["reshaped_input_sizes"])[0][0, 0].numpy()
            ids[mask & (ids == 0)] = i
        return ids


SEGMENTERS = {
    "color-regions": ColorRegionSegmenter,
    "grounded-sam": GroundedSamSegmenter,
}
