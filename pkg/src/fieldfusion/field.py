"""Multi-view fused implicit field: signed distance, descriptor, instance probability.

A query point is projected into every calibrated view. Each view contributes
a truncated depth difference along its ray, a visibility bit, and an
exponential confidence weight; descriptors and one-hot instance masks are
sampled at the projected pixel and fused across views:

    d = sum_i v_i d'_i / (delta + sum_i v_i)
    f = sum_i v_i w_i f_i / (delta + sum_i v_i)
    p = sum_i v_i w_i p_i / (delta + sum_i v_i)

The fused signed distance follows the usual SDF convention: positive in
observed free space, negative inside objects (each view's truncated term
enters the sum as surface depth minus query depth). The denominator
intentionally uses sum(v_i), not sum(v_i w_i), so fused descriptors shrink
in magnitude when confidence drops; consumers that compare descriptors
normalize first. The field is differentiable away from truncation
boundaries, with v_i and w_i treated as locally constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Intrinsics,
    Pose,
    bilinear_gradient_batch,
    bilinear_sample_batch,
    project_batch,
    projection_jacobian_batch,
)

DEPTH_NO_RETURN = 0.0
DEFAULT_MU = 0.02       # truncation half-width, meters (tabletop scale)
DEFAULT_DELTA = 1e-4    # fusion denominator stabilizer


class CameraView:
    """One calibrated RGBD viewpoint with depth, feature, and instance maps.

    Masks are stored compactly as a per-pixel instance-id map (0 is
    background); the one-hot H x W x M representation is materialized on
    demand via :attr:`masks`. Depth uses 0.0 as the no-return sentinel.
    """

    def __init__(self, intr: Intrinsics, pose: Pose, depth: np.ndarray,
                 features: np.ndarray, mask_ids: np.ndarray | None = None,
                 instance_count: int | None = None, masks: np.ndarray | None = None):
        depth = np.ascontiguousarray(depth, dtype=np.float64)
        features = np.ascontiguousarray(features, dtype=np.float32)
        if depth.ndim != 2 or features.ndim != 3:
            raise ValueError("depth must be HxW and features HxWxN")
        h, w = depth.shape
        if h < 2 or w < 2:
            raise ValueError("maps must be at least 2x2 for interpolation")
        if features.shape[:2] != (h, w):
            raise ValueError(f"features {features.shape[:2]} vs depth {(h, w)} size mismatch")
        if (h, w) != (intr.height, intr.width):
            raise ValueError("map size does not match intrinsics")
        if np.any(depth < 0):
            raise ValueError("depth must be >= 0 (0.0 marks no return)")

        if masks is not None:
            masks = np.asarray(masks)
            if masks.ndim != 3 or masks.shape[:2] != (h, w):
                raise ValueError("masks must be HxWxM")
            onehot = np.all((masks == 0) | (masks == 1), axis=None)
            if not (onehot and np.all(masks.sum(axis=2) == 1)):
                raise ValueError("masks must be one-hot at every pixel")
            mask_ids = np.argmax(masks, axis=2).astype(np.uint8)
            instance_count = masks.shape[2]
        if mask_ids is None:
            raise ValueError("provide mask_ids or one-hot masks")
        mask_ids = np.ascontiguousarray(mask_ids, dtype=np.uint8)
        if mask_ids.shape != (h, w):
            raise ValueError("mask_ids must match depth shape")
        if instance_count is None:
            instance_count = int(mask_ids.max()) + 1
        if int(mask_ids.max()) >= instance_count:
            raise ValueError("instance id out of range")

        self.intr = intr
        self.pose = pose
        self.depth = depth
        self.features = features
        self.mask_ids = mask_ids
        self.instance_count = int(instance_count)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[2]

    @property
    def masks(self) -> np.ndarray:
        """One-hot H x W x M instance masks (index 0 is background)."""
        return np.eye(self.instance_count, dtype=np.float32)[self.mask_ids]

    def with_mask_ids(self, mask_ids: np.ndarray, instance_count: int) -> "CameraView":
        return CameraView(self.intr, self.pose, self.depth, self.features,
                          mask_ids=mask_ids, instance_count=instance_count)


@dataclass(frozen=True)
class FieldValue:
    """Fused output at one query point. Exactly zero when unobserved."""

    d: float
    f: np.ndarray
    p: np.ndarray
    observed: bool


class FieldValueBatch:
    """Struct-of-arrays batch result; indexes like a list of FieldValue."""

    def __init__(self, d, f, p, observed):
        self.d = d
        self.f = f
        self.p = p
        self.observed = observed

    def __len__(self):
        return self.d.shape[0]

    def __getitem__(self, i) -> FieldValue:
        return FieldValue(float(self.d[i]), self.f[i].copy(), self.p[i].copy(),
                          bool(self.observed[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))


class FusedField:
    """K calibrated views plus fusion hyperparameters; immutable once built."""

    def __init__(self, views, mu: float, delta: float):
        if len(views) == 0:
            raise ValueError("need at least one view")
        if mu <= 0 or delta <= 0:
            raise ValueError("mu and delta must be positive")
        n = views[0].feature_dim
        m = views[0].instance_count
        for i, v in enumerate(views):
            if v.feature_dim != n:
                raise ValueError(f"view {i} feature dim {v.feature_dim} != {n}")
            if v.instance_count != m:
                raise ValueError(f"view {i} instance count {v.instance_count} != {m}")
        self.views = list(views)
        self.mu = float(mu)
        self.delta = float(delta)
        self.feature_dim = n
        self.instance_count = m
        self._packed = None

    @property
    def k(self) -> int:
        return len(self.views)

    def packed(self):
        # flat per-view arrays for the jitted kernel; built lazily, cached
        if self._packed is None:
            from ._kernels import pack_views
            self._packed = pack_views(self.views)
        return self._packed


def build_field(views, mu: float = DEFAULT_MU, delta: float = DEFAULT_DELTA) -> FusedField:
    """Validate and assemble views into a queryable fused field (no copies)."""
    return FusedField(views, mu, delta)


def truncated_depth_difference(r: float, r_prime: float, mu: float):
    """Depth difference along the viewing ray and its clamp to [-mu, mu].

    Sentinel (no-return) readings are the caller's concern: a view whose
    interpolated depth touches a sentinel pixel is marked invisible before
    this arithmetic applies.
    """
    d = r - r_prime
    return d, min(max(d, -mu), mu)


def view_weights(d_i: float, mu: float):
    """Visibility bit and confidence weight for one view.

    v = 1 while the point is not behind the observed surface (d < mu);
    w = exp(min(mu - |d|, 0) / mu) is 1 inside the truncation band and
    decays exponentially outside it.
    """
    v = 1 if d_i < mu else 0
    w = float(np.exp(min(mu - abs(d_i), 0.0) / mu))
    return v, w


def _bilinear_depth_valid(depth: np.ndarray, uv: np.ndarray, max_jump: float):
    """Bilinear depth plus a validity bit.

    A sample is valid only when all four interpolation corners carry real
    returns and their spread stays below ``max_jump``: blending across a
    no-return pixel or a depth discontinuity (an object silhouette) would
    fabricate geometry between the foreground and background surfaces.
    """
    h, w = depth.shape
    u = np.clip(uv[:, 0], 0.0, w - 1.0)
    v = np.clip(uv[:, 1], 0.0, h - 1.0)
    u0 = np.minimum(np.floor(u), w - 2.0).astype(np.intp)
    v0 = np.minimum(np.floor(v), h - 2.0).astype(np.intp)
    c00 = depth[v0, u0]
    c01 = depth[v0, u0 + 1]
    c10 = depth[v0 + 1, u0]
    c11 = depth[v0 + 1, u0 + 1]
    cmin = np.minimum(np.minimum(c00, c01), np.minimum(c10, c11))
    cmax = np.maximum(np.maximum(c00, c01), np.maximum(c10, c11))
    valid = (cmin > DEPTH_NO_RETURN) & (cmax - cmin <= max_jump)
    fu = u - u0
    fv = v - v0
    r_prime = ((1 - fv) * ((1 - fu) * c00 + fu * c01)
               + fv * ((1 - fu) * c10 + fu * c11))
    return r_prime, valid


def _nearest_ids(mask_ids: np.ndarray, uv: np.ndarray):
    h, w = mask_ids.shape
    ui = np.clip(np.floor(uv[:, 0] + 0.5), 0, w - 1).astype(np.intp)
    vi = np.clip(np.floor(uv[:, 1] + 0.5), 0, h - 1).astype(np.intp)
    return mask_ids[vi, ui]


def _per_view_terms(view: CameraView, xs: np.ndarray, mu: float):
    """Visibility, weight, and truncated depth difference for one view.

    ``d_i`` is the raw depth difference (positive behind the surface, the
    quantity driving visibility); ``d_t`` is its clamp negated into the SDF
    convention used by the fused distance (positive in free space).
    """
    uv, r, behind, inb = project_batch(xs, view.pose, view.intr)
    r_prime, depth_ok = _bilinear_depth_valid(view.depth, uv, mu)
    candidate = inb & depth_ok
    d_i = np.where(candidate, r - r_prime, 0.0)
    v = candidate & (d_i < mu)
    w = np.exp(np.minimum(mu - np.abs(d_i), 0.0) / mu)
    d_t = -np.clip(d_i, -mu, mu)
    return uv, d_i, d_t, v, w


def sample_view(view: CameraView, x, mu: float = DEFAULT_MU):
    """Single-view contribution at one point: (d_trunc, f_i, p_i, v_i, w_i).

    ``d_trunc`` is this view's truncated signed-distance term in the fused
    convention (positive in free space); `truncated_depth_difference` keeps
    the raw behind-positive orientation. Out-of-frame, behind-camera, or
    sentinel-depth samples report v_i = 0 with every contribution zeroed.
    """
    xs = np.asarray(x, dtype=np.float64).reshape(1, 3)
    uv, d_i, d_t, v, w = _per_view_terms(view, xs, mu)
    if not v[0]:
        return 0.0, np.zeros(view.feature_dim), np.zeros(view.instance_count), 0, 0.0
    f_i = bilinear_sample_batch(view.features, uv)[0].astype(np.float64)
    p_i = np.zeros(view.instance_count)
    p_i[_nearest_ids(view.mask_ids, uv)[0]] = 1.0
    return float(d_t[0]), f_i, p_i, 1, float(w[0])


def _evaluate_batch_numpy(field: FusedField, xs: np.ndarray,
                          with_features: bool = True) -> FieldValueBatch:
    """Reference fusion path; the jitted kernel must agree with this."""
    n = xs.shape[0]
    sum_v = np.zeros(n)
    sum_vd = np.zeros(n)
    sum_f = np.zeros((n, field.feature_dim))
    sum_p = np.zeros((n, field.instance_count))
    rows = np.arange(n)
    for view in field.views:
        uv, d_i, d_t, v, w = _per_view_terms(view, xs, field.mu)
        vf = v.astype(np.float64)
        sum_v += vf
        sum_vd += vf * d_t
        if with_features:
            vw = vf * w
            f_i = bilinear_sample_batch(view.features, uv)
            sum_f += vw[:, None] * f_i
            ids = _nearest_ids(view.mask_ids, uv)
            sum_p[rows, ids] += vw
    denom = field.delta + sum_v
    d = sum_vd / denom
    f = sum_f / denom[:, None]
    p = sum_p / denom[:, None]
    return FieldValueBatch(d, f, p, sum_v > 0)


def evaluate(field: FusedField, x) -> FieldValue:
    """Fused (d, f, p) at one world point."""
    return evaluate_batch(field, np.asarray(x, dtype=np.float64).reshape(1, 3))[0]


def evaluate_batch(field: FusedField, xs, with_features: bool = True,
                   use_kernel: bool = True) -> FieldValueBatch:
    """Fused values for a batch of points; order-preserving, elementwise
    identical to `evaluate`.

    The compiled kernel handles large batches; ``use_kernel=False`` forces
    the plain-numpy reference path. ``with_features=False`` skips descriptor
    and mask fusion (geometry-only queries, e.g. meshing grids).
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64).reshape(-1, 3)
    if xs.shape[0] == 0:
        return FieldValueBatch(np.zeros(0), np.zeros((0, field.feature_dim)),
                               np.zeros((0, field.instance_count)),
                               np.zeros(0, dtype=bool))
    if not np.all(np.isfinite(xs)):
        raise ValueError("query points must be finite")
    if use_kernel:
        from ._kernels import evaluate_kernel
        return evaluate_kernel(field, xs, with_features)
    return _evaluate_batch_numpy(field, xs, with_features)


def fusion_gradients(field: FusedField, xs):
    """Fused values plus analytic spatial derivatives at each point.

    Returns (batch, grad_d, jac_f):
      - grad_d: (n, 3) gradient of the fused signed distance
      - jac_f:  (n, N, 3) Jacobian of the fused descriptor
    v_i and w_i are held locally constant, the clamp zeroes the depth term
    outside the truncation band, and clamped pixel coordinates contribute
    zero gradient. Unobserved points get zero derivatives.
    """
    xs = np.asarray(xs, dtype=np.float64).reshape(-1, 3)
    n = xs.shape[0]
    sum_v = np.zeros(n)
    sum_vd = np.zeros(n)
    sum_f = np.zeros((n, field.feature_dim))
    sum_p = np.zeros((n, field.instance_count))
    sum_gd = np.zeros((n, 3))
    sum_jf = np.zeros((n, field.feature_dim, 3))
    rows = np.arange(n)
    for view in field.views:
        uv, d_i, d_t, v, w = _per_view_terms(view, xs, field.mu)
        vf = v.astype(np.float64)
        vw = vf * w
        sum_v += vf
        sum_vd += vf * d_t

        jproj = projection_jacobian_batch(xs, view.pose, view.intr)  # (n, 2, 3)
        ju = jproj[:, 0, :]
        jv = jproj[:, 1, :]

        f_i = bilinear_sample_batch(view.features, uv)
        sum_f += vw[:, None] * f_i
        ids = _nearest_ids(view.mask_ids, uv)
        sum_p[rows, ids] += vw

        dfdu, dfdv = bilinear_gradient_batch(view.features, uv)  # (n, N) each
        jf = dfdu[:, :, None] * ju[:, None, :] + dfdv[:, :, None] * jv[:, None, :]
        sum_jf += vw[:, None, None] * jf

        # d_t = -clamp(r - r', mu): gradient is (dr'/dx - dr/dx) inside the band
        drdu, drdv = bilinear_gradient_batch(view.depth, uv)
        drp = drdu[:, None] * ju + drdv[:, None] * jv
        dr = view.pose.rotation[2]  # camera z row: dr/dx for z-depth
        inside = (np.abs(d_i) < field.mu) & v
        sum_gd += (vf * inside)[:, None] * (drp - dr[None, :])

    denom = field.delta + sum_v
    batch = FieldValueBatch(sum_vd / denom, sum_f / denom[:, None],
                            sum_p / denom[:, None], sum_v > 0)
    grad_d = sum_gd / denom[:, None]
    jac_f = sum_jf / denom[:, None, None]
    return batch, grad_d, jac_f


def feature_gradient(field: FusedField, x, target):
    """Gradient of || f(x) - target ||_2 with respect to x.

    Returns (gradient, observed). Unobserved points and exact zero residuals
    yield a zero gradient (the norm is not differentiable at zero).
    """
    xs = np.asarray(x, dtype=np.float64).reshape(1, 3)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if target.shape[0] != field.feature_dim:
        raise ValueError("target dimension mismatch")
    batch, _, jac_f = fusion_gradients(field, xs)
    if not batch.observed[0]:
        return np.zeros(3), False
    resid = batch.f[0] - target
    norm = np.linalg.norm(resid)
    if norm < 1e-15:
        return np.zeros(3), True
    return jac_f[0].T @ resid / norm, True


def associate_masks(views, merge_dist: float = 0.03):
    """Relabel per-view instance masks to consistent global ids.

    Each (view, local-id) component is back-projected through its valid
    depth pixels; components are greedily merged on 3D centroid proximity in
    descending pixel-count order, never merging two components of one view.
    Components without any valid depth, and centroids matching no cluster,
    open new global ids. Returns (relabeled views, global instance count).
    """
    comps = []
    for vi, view in enumerate(views):
        h, w = view.depth.shape
        for local in np.unique(view.mask_ids):
            if local == 0:
                continue
            sel = (view.mask_ids == local) & (view.depth > DEPTH_NO_RETURN)
            count = int(sel.sum())
            if count == 0:
                comps.append((0, vi, int(local), None))
                continue
            vs, us = np.nonzero(sel)
            z = view.depth[vs, us]
            cam = np.stack([(us - view.intr.cx) / view.intr.fx * z,
                            (vs - view.intr.cy) / view.intr.fy * z,
                            z], axis=1)
            centroid = view.pose.camera_to_world(cam).mean(axis=0)
            comps.append((count, vi, int(local), centroid))

    comps.sort(key=lambda c: (-c[0], c[1], c[2]))
    clusters = []  # [centroid, weight, {view_idx}]
    assignment = {}  # (view, local) -> global id (1-based)
    for count, vi, local, centroid in comps:
        if centroid is None:
            clusters.append([None, 0, {vi}])
            assignment[(vi, local)] = len(clusters)
            continue
        best = -1
        best_d = merge_dist
        for ci, (c_cent, c_w, c_views) in enumerate(clusters):
            if c_cent is None or vi in c_views:
                continue
            dist = np.linalg.norm(centroid - c_cent)
            if dist < best_d:
                best_d = dist
                best = ci
        if best >= 0:
            cent, wgt, vset = clusters[best]
            clusters[best][0] = (cent * wgt + centroid * count) / (wgt + count)
            clusters[best][1] = wgt + count
            vset.add(vi)
            assignment[(vi, local)] = best + 1
        else:
            clusters.append([centroid, count, {vi}])
            assignment[(vi, local)] = len(clusters)

    m = len(clusters) + 1
    out = []
    for vi, view in enumerate(views):
        lut = np.zeros(int(view.mask_ids.max()) + 1, dtype=np.uint8)
        for (v2, local), gid in assignment.items():
            if v2 == vi:
                lut[local] = gid
        out.append(view.with_mask_ids(lut[view.mask_ids], m))
    return out, m
