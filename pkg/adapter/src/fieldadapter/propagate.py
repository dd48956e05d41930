"""Temporal instance-id propagation across video frames.

``IoUPropagator`` carries ids frame to frame by greedy mask overlap; it
needs no weights and flags divergence when a tracked id loses support.
``XMemPropagator`` documents the external-model path: XMem has no
`transformers` port, so it requires a vendored checkpoint and raises
``ModelLoadError`` until one is configured.
"""

from __future__ import annotations

import numpy as np

from .backbones import ModelLoadError


def _iou(a: np.ndarray, b: np.ndarray) -> float:
    inter = np.logical_and(a, b).sum()
    union = np.logical_or(a, b).sum()
    return float(inter) / float(union) if union else 0.0


class IoUPropagator:
    """Greedy mask-overlap id carry-over with divergence flags."""

    name = "iou"

    def __init__(self, min_iou: float = 0.1):
        self.min_iou = min_iou

    def propagate(self, prev_ids: np.ndarray, new_ids: np.ndarray):
        """Relabel `new_ids` (arbitrary labels) to inherit `prev_ids` labels.

        Returns (relabeled ids, diverged id list). New detections that match
        nothing get fresh ids above the previous maximum.
        """
        prev_ids = np.asarray(prev_ids)
        new_ids = np.asarray(new_ids)
        prev_labels = [p for p in np.unique(prev_ids) if p != 0]
        new_labels = [n for n in np.unique(new_ids) if n != 0]
        pairs = []
        for p in prev_labels:
            pm = prev_ids == p
            for n in new_labels:
                pairs.append((-_iou(pm, new_ids == n), int(p), int(n)))
        pairs.sort()
        mapping: dict = {}
        used_prev: set = set()
        for neg_iou, p, n in pairs:
            if -neg_iou < self.min_iou:
                break
            if n not in mapping and p not in used_prev:
                mapping[n] = p
                used_prev.add(p)
        next_free = int(max(prev_labels, default=0)) + 1
        out = np.zeros_like(new_ids)
        for n in new_labels:
            if n not in mapping:
                mapping[n] = next_free
                next_free += 1
            out[new_ids == n] = mapping[n]
        diverged = sorted(set(int(p) for p in prev_labels) - used_prev)
        return out, diverged


class XMemPropagator:
    """Placeholder for an XMem-based propagator (external checkpoint)."""

    name = "xmem"

    def __init__(self, checkpoint: str | None = None):
        raise ModelLoadError(
            "XMem has no transformers port; vendor the official checkpoint and "
            "wrap it here (see scripts/fetch_weights.py for pointers). The "
            "built-in 'iou' propagator covers the weight-free path.")


PROPAGATORS = {
    "iou": IoUPropagator,
    "xmem": XMemPropagator,
}
