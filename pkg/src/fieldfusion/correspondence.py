"""Descriptor-space correspondence from 3D keypoints to 2D goal-image points.

Per keypoint, the goal image is scored by descriptor distance, the scores
pass through a sharpness-controlled softmax over all pixels (optionally
restricted to a paired instance mask), and the goal point is the
probability-weighted centroid of pixel coordinates. Descriptors are
L2-normalized on both sides before comparison, compensating the magnitude
shrinkage the fusion denominator introduces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import FusedField
from .geometry import Intrinsics, Pose
from .tracking import KeypointSet

DEFAULT_SHARPNESS = 100.0


@dataclass(frozen=True)
class GoalSpec:
    """Goal image features plus the virtual reference camera."""

    goal_features: np.ndarray                  # (H, W, N)
    reference_pose: Pose
    reference_intr: Intrinsics
    sharpness: float = DEFAULT_SHARPNESS
    goal_mask_ids: np.ndarray | None = None    # (H, W) instance ids, 0 background
    goal_instance_count: int | None = None

    def __post_init__(self):
        gf = np.asarray(self.goal_features)
        if gf.ndim != 3:
            raise ValueError("goal features must be HxWxN")
        if not np.isfinite(self.sharpness) or self.sharpness < 0:
            raise ValueError("sharpness must be finite and >= 0")
        object.__setattr__(self, "goal_features", gf)
        if self.goal_mask_ids is not None:
            ids = np.asarray(self.goal_mask_ids, dtype=np.uint8)
            if ids.shape != gf.shape[:2]:
                raise ValueError("goal mask shape mismatch")
            object.__setattr__(self, "goal_mask_ids", ids)
            if self.goal_instance_count is None:
                object.__setattr__(self, "goal_instance_count", int(ids.max()) + 1)


@dataclass(frozen=True)
class GoalPoints:
    points_2d: np.ndarray                 # (n, 2) pixel coordinates
    heatmaps: np.ndarray | None = None    # (n, H, W), each sums to 1


def feature_distance_map(goal_features: np.ndarray, f0: np.ndarray) -> np.ndarray:
    """Per-pixel Euclidean descriptor distance to one anchor."""
    gf = np.asarray(goal_features, dtype=np.float64)
    f0 = np.asarray(f0, dtype=np.float64).reshape(-1)
    if gf.shape[2] != f0.shape[0]:
        raise ValueError(f"feature dim mismatch: map has {gf.shape[2]}, anchor {f0.shape[0]}")
    return np.linalg.norm(gf - f0, axis=2)


def softmax_weights(alpha: np.ndarray, s: float) -> np.ndarray:
    """Image-wide softmax of -s * alpha, max-shifted for stability."""
    a = -float(s) * np.asarray(alpha, dtype=np.float64)
    a -= a.max()
    e = np.exp(a)
    return e / e.sum()


def _unit_rows(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x, axis=-1, keepdims=True)
    return np.where(n > 1e-12, x / np.where(n > 1e-12, n, 1.0), 0.0)


def goal_points(field: FusedField, kps: KeypointSet, goal: GoalSpec,
                pairing: dict | None = None,
                return_heatmaps: bool = False) -> GoalPoints:
    """Goal-image location for every keypoint.

    With goal masks present, the softmax is restricted to the pixels of the
    instance paired with the keypoints' instance (pairing computed by
    `pair_instances` when not supplied); an empty paired mask is an error.
    Each returned point is a convex combination of pixel coordinates.
    """
    h, w, n = goal.goal_features.shape
    if n != field.feature_dim:
        raise ValueError("goal feature dimension does not match the field")
    gf = _unit_rows(np.asarray(goal.goal_features, dtype=np.float64).reshape(-1, n))
    anchors = _unit_rows(np.asarray(kps.anchor_features, dtype=np.float64))

    # ||g - f||^2 = 2 - 2 g.f for unit rows (zero rows give distance 1)
    sim = gf @ anchors.T                                   # (HW, n_s)
    gn = (gf ** 2).sum(axis=1)[:, None]
    fn = (anchors ** 2).sum(axis=1)[None, :]
    alpha = np.sqrt(np.maximum(gn + fn - 2.0 * sim, 0.0))  # (HW, n_s)

    mask_flat = None
    if goal.goal_mask_ids is not None:
        if pairing is None:
            pairing = pair_instances(field, [kps], goal)
        target = pairing.get(kps.instance)
        if target is None:
            raise ValueError(f"no goal instance paired with workspace instance {kps.instance}")
        mask_flat = goal.goal_mask_ids.reshape(-1) == target
        if not np.any(mask_flat):
            raise ValueError(f"paired goal instance {target} has no pixels")

    us, vs = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    uv = np.stack([us.ravel(), vs.ravel()], axis=1)        # (HW, 2)

    logits = -goal.sharpness * alpha
    if mask_flat is not None:
        logits[~mask_flat] = -np.inf
    logits -= logits.max(axis=0, keepdims=True)
    beta = np.exp(logits)
    beta /= beta.sum(axis=0, keepdims=True)                # (HW, n_s)

    pts = beta.T @ uv                                      # (n_s, 2)
    heat = beta.T.reshape(-1, h, w) if return_heatmaps else None
    return GoalPoints(points_2d=pts, heatmaps=heat)


def pair_instances(field: FusedField, keypoint_sets, goal: GoalSpec) -> dict:
    """Greedy workspace-to-goal instance pairing by mean-descriptor cosine.

    Deterministic tie-break by (workspace id, goal id) order; workspace
    instances beyond the goal's supply map to None.
    """
    if goal.goal_mask_ids is None:
        raise ValueError("goal masks are required for instance pairing")
    goal_ids = [g for g in np.unique(goal.goal_mask_ids) if g != 0]
    if not goal_ids:
        raise ValueError("goal image contains no instances")
    gf = _unit_rows(np.asarray(goal.goal_features, dtype=np.float64))
    goal_means = {}
    for g in goal_ids:
        sel = goal.goal_mask_ids == g
        goal_means[int(g)] = _unit_rows(gf[sel].mean(axis=0))

    ws_means = {}
    for ks in keypoint_sets:
        anchors = _unit_rows(np.asarray(ks.anchor_features, dtype=np.float64))
        ws_means[ks.instance] = _unit_rows(anchors.mean(axis=0))

    pairs = []
    for wid, wm in sorted(ws_means.items()):
        for gid, gm in sorted(goal_means.items()):
            pairs.append((-float(wm @ gm), wid, gid))
    pairs.sort()

    pairing: dict = {wid: None for wid in ws_means}
    used_goal: set = set()
    for _, wid, gid in pairs:
        if pairing[wid] is None and gid not in used_goal:
            pairing[wid] = gid
            used_goal.add(gid)
    return pairing
