"""Keypoint initialization and frame-to-frame tracking on the fused field.

Keypoints are seeded on an instance surface by farthest-point sampling and
tracked by minimizing descriptor distance to their anchor features,

    E(X) = sum_j || f(x_j) - f0_j ||^2  +  lambda_dist * sum_j d(x_j)^2,

with projected gradient descent: optionally every iterate is snapped onto
the rigid-motion manifold of the initial configuration (Kabsch), and the
distance term regularizes points back onto the surface band.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .field import FusedField, evaluate_batch, fusion_gradients


@dataclass(frozen=True)
class KeypointSet:
    """Tracked points of one instance with their immutable anchors."""

    points: np.ndarray            # (n, 3) current positions s^t
    anchor_points: np.ndarray     # (n, 3) initial positions s^0
    anchor_features: np.ndarray   # (n, N) descriptors at s^0, fixed for the track
    instance: int
    frame: int = 0
    lost: bool = False
    short: bool = False           # fewer candidates than requested at init

    def __post_init__(self):
        for name in ("points", "anchor_points", "anchor_features"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len(self.points) < 1:
            raise ValueError("need at least one keypoint")

    def __len__(self):
        return len(self.points)

    def with_points(self, points, frame=None, lost=False) -> "KeypointSet":
        return replace(self, points=np.asarray(points, dtype=np.float64),
                       frame=self.frame + 1 if frame is None else frame,
                       lost=lost)


@dataclass(frozen=True)
class TrackConfig:
    step: float = 5e-3            # meters per unit gradient
    max_iterations: int = 100
    tolerance: float = 1e-4       # meters; stop when the update falls below
    lambda_dist: float = 1.0
    rigid: bool = True
    max_move: float = 2.5e-3      # trust region: per-iteration point movement cap

    def __post_init__(self):
        if self.step <= 0 or self.tolerance <= 0 or self.lambda_dist < 0:
            raise ValueError("invalid tracking configuration")
        if self.max_move <= 0:
            raise ValueError("max_move must be positive")


def _farthest_point_subset(candidates: np.ndarray, n: int) -> np.ndarray:
    """Greedy FPS; the seed is the candidate nearest the candidate centroid."""
    centroid = candidates.mean(axis=0)
    chosen = [int(np.argmin(np.linalg.norm(candidates - centroid, axis=1)))]
    min_d = np.linalg.norm(candidates - candidates[chosen[0]], axis=1)
    while len(chosen) < n:
        nxt = int(np.argmax(min_d))
        chosen.append(nxt)
        min_d = np.minimum(min_d, np.linalg.norm(candidates - candidates[nxt], axis=1))
    return candidates[chosen]


def _default_grid_points(field: FusedField, cell: float) -> np.ndarray:
    """Probe lattice over the union of back-projected view point clouds."""
    los = []
    his = []
    for view in field.views:
        z = view.depth
        valid = z > 0
        if not np.any(valid):
            continue
        vs, us = np.nonzero(valid)
        zz = z[vs, us]
        cam = np.stack([(us - view.intr.cx) / view.intr.fx * zz,
                        (vs - view.intr.cy) / view.intr.fy * zz, zz], axis=1)
        world = view.pose.camera_to_world(cam)
        los.append(world.min(axis=0))
        his.append(world.max(axis=0))
    if not los:
        raise ValueError("no valid depth in any view")
    lo = np.min(los, axis=0) - cell
    hi = np.max(his, axis=0) + cell
    axes = [np.arange(lo[k], hi[k] + cell, cell) for k in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    return np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)


def _candidates(field: FusedField, grid_points: np.ndarray, instance: int,
                tau_surf: float) -> np.ndarray:
    from .field import _nearest_ids, _per_view_terms

    batch = evaluate_batch(field, grid_points)
    near = batch.observed & (np.abs(batch.d) <= tau_surf)
    labels = np.argmax(batch.p, axis=1)
    keep = near & (labels == instance)
    # Every visible view must agree on the instance AND be individually
    # in-band: the fused |d| alone admits phantom points near silhouettes,
    # where large opposite-sign per-view differences cancel, and argmax-p
    # alone admits points of adjacent instances at occlusion boundaries.
    per_view_band = min(2.0 * tau_surf, 0.9 * field.mu)
    for view in field.views:
        if not np.any(keep):
            break
        uv, d_i, _, v, _ = _per_view_terms(view, grid_points, field.mu)
        ids = _nearest_ids(view.mask_ids, uv)
        keep &= ~(v & ((ids != instance) | (np.abs(d_i) > per_view_band)))
    return grid_points[keep]


def sample_keypoints(field: FusedField, instance: int, n_s: int,
                     tau_surf: float | None = None,
                     grid_points: np.ndarray | None = None,
                     cell: float | None = None) -> KeypointSet:
    """Seed keypoints on the surface band of one instance.

    Candidates are observed grid points with |d| <= tau_surf whose instance
    argmax matches; a farthest-point subset of size n_s is returned with its
    anchor descriptors. The default grid is two-stage: a coarse pass locates
    the instance, then a fine lattice (cell tau_surf / 2) covers its
    neighborhood so candidates hug the surface; anchors sampled far off the
    surface would mix features from different surface points via parallax.
    Fewer candidates than n_s returns them all with the ``short`` flag set.
    """
    if tau_surf is None:
        tau_surf = field.mu / 4
    if grid_points is None:
        coarse = _default_grid_points(field, cell or field.mu / 2)
        rough = _candidates(field, coarse, instance, max(tau_surf, field.mu / 2))
        if len(rough) == 0:
            raise ValueError(f"instance {instance} not present within tau_surf of any surface")
        fine_cell = max(tau_surf / 2, 2.5e-4)
        lo = rough.min(axis=0) - 2 * tau_surf
        hi = rough.max(axis=0) + 2 * tau_surf
        axes = [np.arange(lo[k], hi[k] + fine_cell, fine_cell) for k in range(3)]
        gx, gy, gz = np.meshgrid(*axes, indexing="ij")
        grid_points = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)
    candidates = _candidates(field, grid_points, instance, tau_surf)
    if len(candidates) == 0:
        raise ValueError(f"instance {instance} not present within tau_surf of any surface")
    short = len(candidates) < n_s
    pts = candidates if short else _farthest_point_subset(candidates, n_s)
    anchors = evaluate_batch(field, pts).f
    return KeypointSet(points=pts, anchor_points=pts, anchor_features=anchors,
                       instance=instance, frame=0, short=short)


def rigid_project(ref: np.ndarray, cur: np.ndarray):
    """Least-squares rigid transform ref -> cur (Kabsch, det +1 enforced).

    Returns (projected, rotation, translation) with projected = R @ ref + t,
    the closest rigid motion of `ref` to `cur`.
    """
    ref = np.asarray(ref, dtype=np.float64).reshape(-1, 3)
    cur = np.asarray(cur, dtype=np.float64).reshape(-1, 3)
    if ref.shape != cur.shape or len(ref) < 3:
        raise ValueError("need matching point sets of size >= 3")
    rc = ref.mean(axis=0)
    cc = cur.mean(axis=0)
    ref0 = ref - rc
    if np.linalg.svd(ref0, compute_uv=False)[1] < 1e-12:
        raise ValueError("reference points are degenerate (collinear or coincident)")
    H = ref0.T @ (cur - cc)
    U, _, Vt = np.linalg.svd(H)
    sign = np.sign(np.linalg.det(Vt.T @ U.T))
    R = Vt.T @ np.diag([1.0, 1.0, sign]) @ U.T
    t = cc - R @ rc
    return ref @ R.T + t, R, t


def _objective(field: FusedField, pts: np.ndarray, anchors: np.ndarray,
               lam: float):
    """Descriptor-matching energy with surface regularization.

    Fused descriptors are unit-normalized on both sides (the same magnitude
    compensation the correspondence stage applies): raw fused magnitudes
    scale with the number of contributing views, which would make the energy
    jump discontinuously wherever a view's visibility flips and stall the
    line search. Unobserved points are excluded entirely; their zeroed
    descriptor carries no data, and penalizing it would reward poses that
    force occluded points into view at the cost of alignment.
    """
    batch, grad_d, jac_f = fusion_gradients(field, pts)
    obs = batch.observed.astype(np.float64)[:, None]
    norms = np.linalg.norm(batch.f, axis=1, keepdims=True)
    safe = np.maximum(norms, 1e-12)
    fhat = np.where(norms > 1e-12, batch.f / safe, 0.0)
    a_norms = np.linalg.norm(anchors, axis=1, keepdims=True)
    ahat = np.where(a_norms > 1e-12, anchors / np.maximum(a_norms, 1e-12), 0.0)
    resid = (fhat - ahat) * obs
    value = float(np.sum(resid ** 2) + lam * np.sum(batch.d ** 2))
    # d(f/|f|)/dx = (I - ff^T/|f|^2) J / |f|
    jtr = np.einsum("jnc,jn->jc", jac_f, resid)
    jtf = np.einsum("jnc,jn->jc", jac_f, fhat)
    proj_jtr = (jtr - jtf * np.sum(fhat * resid, axis=1)[:, None]) / safe[:, 0][:, None]
    grad = 2.0 * np.where(norms > 1e-12, proj_jtr, 0.0) * obs \
        + 2.0 * lam * batch.d[:, None] * grad_d
    return value, grad, batch.observed


def _instance_cloud(field: FusedField, instance: int):
    """Back-projected world points of the instance's mask pixels, all views."""
    clouds = []
    for view in field.views:
        sel = (view.mask_ids == instance) & (view.depth > 0)
        if not np.any(sel):
            continue
        vs, us = np.nonzero(sel)
        z = view.depth[vs, us]
        cam = np.stack([(us - view.intr.cx) / view.intr.fx * z,
                        (vs - view.intr.cy) / view.intr.fy * z, z], axis=1)
        clouds.append(view.pose.camera_to_world(cam))
    return np.concatenate(clouds) if clouds else None


def _instance_centroid(field: FusedField, instance: int):
    cloud = _instance_cloud(field, instance)
    return cloud.mean(axis=0) if cloud is not None else None


def _descriptor_match_start(field: FusedField, kps: KeypointSet):
    """Coarse global re-localization: pair anchors with near-surface
    candidates by descriptor cosine and fit a trimmed rigid transform.

    Returns the transformed anchor configuration, or None when the instance
    is too sparse to localize.
    """
    cloud = _instance_cloud(field, kps.instance)
    if cloud is None or len(cloud) < 10:
        return None
    lo = cloud.min(axis=0) - field.mu
    hi = cloud.max(axis=0) + field.mu
    cell = max(field.mu / 8, float(np.max(hi - lo)) / 64.0)
    axes = [np.arange(lo[k], hi[k] + cell, cell) for k in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)
    cand = _candidates(field, grid, kps.instance, field.mu / 4)
    if len(cand) < 8:
        return None
    if len(cand) > 4000:
        cand = cand[:: len(cand) // 4000 + 1]
    cand_f = evaluate_batch(field, cand).f
    cn = np.linalg.norm(cand_f, axis=1, keepdims=True)
    cand_f = np.where(cn > 1e-12, cand_f / np.maximum(cn, 1e-12), 0.0)
    an = np.linalg.norm(kps.anchor_features, axis=1, keepdims=True)
    anchors = np.where(an > 1e-12, kps.anchor_features / np.maximum(an, 1e-12), 0.0)
    sim = anchors @ cand_f.T
    best = np.argmax(sim, axis=1)
    matched = cand[best]
    try:
        _, R, t = rigid_project(kps.anchor_points, matched)
        resid = np.linalg.norm(kps.anchor_points @ R.T + t - matched, axis=1)
        keep = resid <= np.percentile(resid, 60)
        if keep.sum() >= 3:
            _, R, t = rigid_project(kps.anchor_points[keep], matched[keep])
    except ValueError:
        return None
    return kps.anchor_points @ R.T + t


def _axis_angle_matrix(w: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(w)
    if theta < 1e-15:
        return np.eye(3)
    k = w / theta
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(theta) * K + (1 - np.cos(theta)) * (K @ K)


def _polish_rigid(field: FusedField, kps: KeypointSet, X: np.ndarray,
                  lam: float, max_evals: int = 400):
    """Derivative-free rigid refinement at shrinking scales.

    Gradient descent stalls on the sub-texel roughness the bilinear feature
    interpolation induces; coordinate descent over the 6 rigid parameters
    walks through it.
    """
    value, _, _ = _objective(field, X, kps.anchor_features, lam)
    centroid = X.mean(axis=0)
    radius = max(float(np.max(np.linalg.norm(X - centroid, axis=1))), 1e-6)
    evals = 0
    for scale in (2e-3, 1e-3, 5e-4, 2e-4, 1e-4):
        improved = True
        while improved and evals < max_evals:
            improved = False
            for coord in range(6):
                for sign in (1.0, -1.0):
                    if coord < 3:
                        Xt = X.copy()
                        Xt[:, coord] += sign * scale
                    else:
                        w = np.zeros(3)
                        w[coord - 3] = sign * scale / radius
                        R = _axis_angle_matrix(w)
                        c = X.mean(axis=0)
                        Xt = (X - c) @ R.T + c
                    vt, _, _ = _objective(field, Xt, kps.anchor_features, lam)
                    evals += 1
                    if vt < value - 1e-12:
                        X, value = Xt, vt
                        improved = True
    return X, value


def track_step(field_next: FusedField, kps: KeypointSet,
               cfg: TrackConfig = TrackConfig()) -> KeypointSet:
    """Advance a keypoint set one frame.

    Rigid tracks are pre-aligned by the shift of the instance's mask
    centroid (descent starts from whichever of the shifted and unshifted
    configurations scores better), widening the basin for large inter-frame
    translations. Backtracking halves the step on objective increase (at
    most 10 times); if no decrease is found the iteration stops, keeping the
    objective non-increasing across accepted iterates. More than half the
    points unobserved marks the track lost and freezes the points.
    """
    first = evaluate_batch(field_next, kps.points)
    if np.mean(first.observed) <= 0.5:
        return kps.with_points(kps.points, lost=True)
    # no view carries mask support for the instance: the object is gone from
    # the observations, even if the vacated space itself is observed
    if _instance_cloud(field_next, kps.instance) is None:
        return kps.with_points(kps.points, lost=True)

    def descend(x0):
        X = np.array(x0)
        value, grad, _ = _objective(field_next, X, kps.anchor_features,
                                    cfg.lambda_dist)
        for _ in range(cfg.max_iterations):
            gmax = float(np.max(np.linalg.norm(grad, axis=1)))
            if gmax == 0.0:
                break
            step = min(cfg.step, cfg.max_move / gmax)
            accepted = False
            for _halving in range(11):
                Xn = X - step * grad
                if cfg.rigid:
                    Xn, _, _ = rigid_project(kps.anchor_points, Xn)
                vn, gn, _ = _objective(field_next, Xn, kps.anchor_features,
                                       cfg.lambda_dist)
                if vn <= value:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            update = float(np.max(np.linalg.norm(Xn - X, axis=1)))
            X, value, grad = Xn, vn, gn
            if update < cfg.tolerance:
                break
        return X, value

    starts = [np.array(kps.points)]
    if cfg.rigid:
        centroid = _instance_centroid(field_next, kps.instance)
        if centroid is not None:
            starts.append(kps.points + (centroid - kps.points.mean(axis=0)))
        matched = _descriptor_match_start(field_next, kps)
        if matched is not None:
            starts.append(matched)

    X, value = None, np.inf
    tried: list = []
    for x0 in starts:
        if any(float(np.max(np.linalg.norm(x0 - t, axis=1))) < cfg.tolerance
               for t in tried):
            continue
        tried.append(x0)
        Xc, vc = descend(x0)
        if cfg.rigid:
            Xc, vc = _polish_rigid(field_next, kps, Xc, cfg.lambda_dist)
        if vc < value:
            X, value = Xc, vc

    final = evaluate_batch(field_next, X)
    lost = np.mean(final.observed) <= 0.5
    return kps.with_points(kps.points if lost else X, lost=lost)


def track_sequence(fields, kps: KeypointSet, cfg: TrackConfig = TrackConfig()):
    """Track through an ordered list of fields; returns the per-frame sets."""
    out = [kps]
    for field in fields:
        kps = track_step(field, kps, cfg)
        out.append(kps)
        if kps.lost:
            break
    return out
