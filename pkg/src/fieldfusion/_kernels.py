"""Compiled fused-query kernel.

One pass per point over all views: projection, bilinear depth with
sentinel-aware validity, truncated depth difference, visibility and
confidence weights, bilinear descriptor and nearest-mask accumulation.
Must agree with the plain-numpy reference in ``field._evaluate_batch_numpy``
(equivalence is covered by tests); any semantic change happens in both.
"""

from __future__ import annotations

import math

import numba
import numpy as np


def pack_views(views):
    """Flatten per-view maps into contiguous arrays indexable by the kernel."""
    k = len(views)
    n = views[0].feature_dim
    rot = np.stack([v.pose.rotation for v in views]).astype(np.float64)
    trans = np.stack([v.pose.translation for v in views]).astype(np.float64)
    fx = np.array([v.intr.fx for v in views], dtype=np.float64)
    fy = np.array([v.intr.fy for v in views], dtype=np.float64)
    cx = np.array([v.intr.cx for v in views], dtype=np.float64)
    cy = np.array([v.intr.cy for v in views], dtype=np.float64)
    hs = np.array([v.depth.shape[0] for v in views], dtype=np.int64)
    ws = np.array([v.depth.shape[1] for v in views], dtype=np.int64)
    offs = np.zeros(k, dtype=np.int64)
    total = 0
    for i, v in enumerate(views):
        offs[i] = total
        total += v.depth.size
    depth_flat = np.empty(total, dtype=np.float64)
    feat_flat = np.empty((total, n), dtype=np.float32)
    ids_flat = np.empty(total, dtype=np.uint8)
    for i, v in enumerate(views):
        sl = slice(offs[i], offs[i] + v.depth.size)
        depth_flat[sl] = v.depth.ravel()
        feat_flat[sl] = v.features.reshape(-1, n)
        ids_flat[sl] = v.mask_ids.ravel()
    return rot, trans, fx, fy, cx, cy, hs, ws, offs, depth_flat, feat_flat, ids_flat


@numba.njit(parallel=True, cache=True)
def _fused_query(rot, trans, fx, fy, cx, cy, hs, ws, offs,
                 depth_flat, feat_flat, ids_flat,
                 mu, delta, xs, with_features,
                 out_d, out_f, out_p, out_obs):
    k = rot.shape[0]
    npts = xs.shape[0]
    nfeat = feat_flat.shape[1]
    for pt in numba.prange(npts):
        x0 = xs[pt, 0]
        x1 = xs[pt, 1]
        x2 = xs[pt, 2]
        sum_v = 0.0
        sum_vd = 0.0
        for i in range(k):
            cz = rot[i, 2, 0] * x0 + rot[i, 2, 1] * x1 + rot[i, 2, 2] * x2 + trans[i, 2]
            if cz <= 0.0:
                continue
            cxp = rot[i, 0, 0] * x0 + rot[i, 0, 1] * x1 + rot[i, 0, 2] * x2 + trans[i, 0]
            cyp = rot[i, 1, 0] * x0 + rot[i, 1, 1] * x1 + rot[i, 1, 2] * x2 + trans[i, 1]
            u = fx[i] * cxp / cz + cx[i]
            v = fy[i] * cyp / cz + cy[i]
            w_img = ws[i]
            h_img = hs[i]
            if u < 0.0 or u > w_img - 1.0 or v < 0.0 or v > h_img - 1.0:
                continue
            u0 = int(math.floor(u))
            if u0 > w_img - 2:
                u0 = w_img - 2
            v0 = int(math.floor(v))
            if v0 > h_img - 2:
                v0 = h_img - 2
            fu = u - u0
            fv = v - v0
            base = offs[i] + v0 * w_img + u0
            c00 = depth_flat[base]
            c01 = depth_flat[base + 1]
            c10 = depth_flat[base + w_img]
            c11 = depth_flat[base + w_img + 1]
            cmin = min(min(c00, c01), min(c10, c11))
            cmax = max(max(c00, c01), max(c10, c11))
            # no-return corners and depth discontinuities invalidate the sample
            if cmin <= 0.0 or cmax - cmin > mu:
                continue
            r_prime = ((1.0 - fv) * ((1.0 - fu) * c00 + fu * c01)
                       + fv * ((1.0 - fu) * c10 + fu * c11))
            d_i = cz - r_prime
            if d_i >= mu:
                continue
            # clamp, then negate into the free-space-positive convention
            d_t = d_i
            if d_t < -mu:
                d_t = -mu
            sum_v += 1.0
            sum_vd -= d_t
            if with_features:
                band = mu - abs(d_i)
                if band > 0.0:
                    band = 0.0
                w_conf = math.exp(band / mu)
                fbase = base
                for c in range(nfeat):
                    a = (1.0 - fu) * feat_flat[fbase, c] + fu * feat_flat[fbase + 1, c]
                    b = (1.0 - fu) * feat_flat[fbase + w_img, c] + fu * feat_flat[fbase + w_img + 1, c]
                    out_f[pt, c] += w_conf * ((1.0 - fv) * a + fv * b)
                ui = int(math.floor(u + 0.5))
                if ui > w_img - 1:
                    ui = w_img - 1
                vi = int(math.floor(v + 0.5))
                if vi > h_img - 1:
                    vi = h_img - 1
                out_p[pt, ids_flat[offs[i] + vi * w_img + ui]] += w_conf
        denom = delta + sum_v
        out_d[pt] = sum_vd / denom
        if with_features:
            for c in range(nfeat):
                out_f[pt, c] /= denom
            for m in range(out_p.shape[1]):
                out_p[pt, m] /= denom
        out_obs[pt] = sum_v > 0.0


def evaluate_kernel(field, xs, with_features: bool = True):
    from .field import FieldValueBatch

    packed = field.packed()
    n = xs.shape[0]
    out_d = np.zeros(n, dtype=np.float64)
    out_f = np.zeros((n, field.feature_dim), dtype=np.float64)
    out_p = np.zeros((n, field.instance_count), dtype=np.float64)
    out_obs = np.zeros(n, dtype=np.bool_)
    _fused_query(*packed, field.mu, field.delta, xs, with_features,
                 out_d, out_f, out_p, out_obs)
    return FieldValueBatch(out_d, out_f, out_p, out_obs)


def warmup():
    """Compile (or load from cache) the query kernel on a miniature scene."""
    from .field import CameraView, build_field, evaluate_batch
    from .geometry import Intrinsics, Pose

    intr = Intrinsics(fx=10.0, fy=10.0, cx=1.0, cy=1.0, width=3, height=3)
    pose = Pose(np.eye(3), np.zeros(3))
    view = CameraView(intr, pose, depth=np.full((3, 3), 1.0),
                      features=np.zeros((3, 3, 2), dtype=np.float32),
                      mask_ids=np.zeros((3, 3), dtype=np.uint8),
                      instance_count=1)
    f = build_field([view], mu=0.05, delta=1e-4)
    evaluate_batch(f, np.array([[0.0, 0.0, 1.0]]))
