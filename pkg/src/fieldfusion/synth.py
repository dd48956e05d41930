"""Synthetic scene generator with analytic ground truth.

Renders exact depth, procedural descriptors, and instance masks for
primitive scenes (spheres, boxes, planes) from arbitrary pinhole cameras,
and provides the matching analytic signed-distance oracle. Depth maps use
the camera-frame z convention and 0.0 as the no-return sentinel.

Procedural features are a fixed per-category random 3->N projection of
object-local coordinates normalized to [-1, 1]^3, so two instances of one
category carry identical features at corresponding object-local points.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .geometry import Intrinsics, Pose, look_at_pose
from .field import CameraView

DEPTH_NO_RETURN = 0.0
BACKGROUND_ID = 0


@dataclass(frozen=True)
class Primitive:
    """One analytic solid.

    ``pose`` is the world-to-local transform (same direction as camera
    poses): x_local = R @ x_world + t.
    """

    kind: str                       # 'sphere' | 'box' | 'plane'
    pose: Pose                      # world -> object-local
    size: np.ndarray                # sphere: (r,); box: half extents (3,); plane: (hx, hy) feature extent
    category: int
    instance: int                   # unique per scene, >= 1 (0 is background)

    def __post_init__(self):
        size = np.atleast_1d(np.asarray(self.size, dtype=np.float64))
        if self.kind not in ("sphere", "box", "plane"):
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        if np.any(size <= 0):
            raise ValueError("size parameters must be positive")
        if self.instance < 1:
            raise ValueError("instance ids start at 1 (0 is background)")
        object.__setattr__(self, "size", size)

    def to_local(self, pts: np.ndarray) -> np.ndarray:
        return self.pose.world_to_camera(pts)

    def local_sdf(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64).reshape(-1, 3)
        if self.kind == "sphere":
            return np.linalg.norm(p, axis=1) - self.size[0]
        if self.kind == "box":
            q = np.abs(p) - self.size.reshape(1, 3)
            outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
            inside = np.minimum(np.max(q, axis=1), 0.0)
            return outside + inside
        # plane: solid half-space below local z = 0
        return p[:, 2]

    def local_coords_normalized(self, p: np.ndarray) -> np.ndarray:
        """Object-local coordinates scaled to [-1, 1]^3 by the bounding box."""
        p = np.asarray(p, dtype=np.float64).reshape(-1, 3)
        if self.kind == "sphere":
            return p / self.size[0]
        if self.kind == "box":
            return p / self.size.reshape(1, 3)
        hx, hy = self.size[0], self.size[1]
        return np.stack([p[:, 0] / hx, p[:, 1] / hy, p[:, 2]], axis=1)


def sphere(center, radius, category=1, instance=1) -> Primitive:
    return Primitive("sphere", Pose(np.eye(3), -np.asarray(center, dtype=np.float64)),
                     np.array([radius]), category, instance)


def box(center, half_extents, category=1, instance=1, yaw=0.0) -> Primitive:
    c, s = np.cos(yaw), np.sin(yaw)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])  # local->world yaw
    return Primitive("box", Pose(R.T, -R.T @ np.asarray(center, dtype=np.float64)),
                     np.asarray(half_extents, dtype=np.float64), category, instance)


def ground_plane(height=0.0, extent=(1.0, 1.0), category=99, instance=1) -> Primitive:
    t = np.array([0.0, 0.0, -height])
    return Primitive("plane", Pose(np.eye(3), t), np.asarray(extent, dtype=np.float64),
                     category, instance)


@dataclass(frozen=True)
class ProceduralFeatureSpec:
    """Per-category fixed random 3->N projection plus optional Gaussian noise."""

    dim: int = 32
    seed: int = 0
    noise_std: float = 0.0
    _cache: dict = dataclass_field(default_factory=dict, repr=False, compare=False)

    def matrix(self, category: int) -> np.ndarray:
        if category not in self._cache:
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, int(category)]))
            self._cache[category] = rng.standard_normal((self.dim, 3)) / np.sqrt(3.0)
        return self._cache[category]

    def features_for(self, prim: Primitive, world_pts: np.ndarray) -> np.ndarray:
        local = prim.pose.world_to_camera(world_pts)  # pose is world->local here
        q = prim.local_coords_normalized(local)
        return q @ self.matrix(prim.category).T


def _ray_sphere(o, d, radius):
    # |o + t d|^2 = r^2; returns smallest positive root or inf
    b = np.sum(o * d, axis=1)
    a = np.sum(d * d, axis=1)
    c = np.sum(o * o, axis=1) - radius**2
    disc = b * b - a * c
    hit = disc >= 0.0
    sq = np.sqrt(np.maximum(disc, 0.0))
    t0 = (-b - sq) / a
    t1 = (-b + sq) / a
    t = np.where(t0 > 1e-9, t0, np.where(t1 > 1e-9, t1, np.inf))
    return np.where(hit, t, np.inf)


def _ray_box(o, d, half):
    # slab method in local coordinates
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d
        t1 = (-half.reshape(1, 3) - o) * inv
        t2 = (half.reshape(1, 3) - o) * inv
    tmin = np.nanmax(np.minimum(t1, t2), axis=1)
    tmax = np.nanmin(np.maximum(t1, t2), axis=1)
    # parallel rays outside a slab never hit
    parallel_miss = np.any((np.abs(d) < 1e-15) & (np.abs(o) > half.reshape(1, 3)), axis=1)
    hit = (tmax >= np.maximum(tmin, 1e-9)) & ~parallel_miss
    t = np.where(tmin > 1e-9, tmin, tmax)
    return np.where(hit, t, np.inf)


def _ray_plane(o, d):
    # local z = 0, solid below; hit from above only
    dz = d[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -o[:, 2] / dz
    ok = (np.abs(dz) > 1e-15) & (t > 1e-9)
    return np.where(ok, t, np.inf)


def render_views(scene, cameras, spec: ProceduralFeatureSpec, *,
                 depth_noise_std: float = 0.0, seed: int = 0) -> list[CameraView]:
    """Render exact depth, procedural features, and instance masks per camera.

    `cameras` is a list of (Pose, Intrinsics). Instance ids in the masks are
    the primitives' ids, globally consistent across views by construction.
    Misses get sentinel depth and the background mask.
    """
    if len(cameras) == 0:
        raise ValueError("need at least one camera")
    ids = [p.instance for p in scene]
    if len(set(ids)) != len(ids):
        raise ValueError("instance ids must be unique")
    m_count = (max(ids) + 1) if ids else 1
    rng = np.random.default_rng(seed)
    views = []
    for pose, intr in cameras:
        h, w = intr.height, intr.width
        us, vs = np.meshgrid(np.arange(w, dtype=np.float64),
                             np.arange(h, dtype=np.float64))
        # rays with unit z in camera frame: parameter t equals z-depth
        dirs_cam = np.stack([(us - intr.cx) / intr.fx,
                             (vs - intr.cy) / intr.fy,
                             np.ones_like(us)], axis=-1).reshape(-1, 3)
        origin = pose.camera_center
        dirs_world = dirs_cam @ pose.rotation  # R^T applied row-wise
        o_rep = np.broadcast_to(origin, dirs_world.shape)

        best_t = np.full(dirs_world.shape[0], np.inf)
        best_prim = np.full(dirs_world.shape[0], -1, dtype=np.int64)
        for k, prim in enumerate(scene):
            o_loc = prim.pose.world_to_camera(o_rep)
            d_loc = dirs_world @ prim.pose.rotation.T
            if prim.kind == "sphere":
                t = _ray_sphere(o_loc, d_loc, prim.size[0])
            elif prim.kind == "box":
                t = _ray_box(o_loc, d_loc, prim.size)
            else:
                t = _ray_plane(o_loc, d_loc)
            closer = t < best_t
            best_t = np.where(closer, t, best_t)
            best_prim = np.where(closer, k, best_prim)

        hit = np.isfinite(best_t)
        depth = np.where(hit, best_t, DEPTH_NO_RETURN).reshape(h, w)
        mask_ids = np.zeros(h * w, dtype=np.uint8)
        feats = np.zeros((h * w, spec.dim), dtype=np.float64)
        for k, prim in enumerate(scene):
            sel = hit & (best_prim == k)
            if not np.any(sel):
                continue
            pts = o_rep[sel] + best_t[sel, None] * dirs_world[sel]
            feats[sel] = spec.features_for(prim, pts)
            mask_ids[sel] = prim.instance
        if spec.noise_std > 0:
            feats[hit] += rng.normal(0.0, spec.noise_std, size=(int(hit.sum()), spec.dim))
        if depth_noise_std > 0:
            noise = rng.normal(0.0, depth_noise_std, size=depth.shape)
            depth = np.where(depth > 0, np.maximum(depth + noise, 1e-6), depth)

        views.append(CameraView(intr=intr, pose=pose,
                                depth=depth.astype(np.float64),
                                features=feats.reshape(h, w, spec.dim).astype(np.float32),
                                mask_ids=mask_ids.reshape(h, w),
                                instance_count=m_count))
    return views


def visibility_count(scene, cameras, pts) -> np.ndarray:
    """Number of cameras with an unoccluded, in-frustum line of sight to each
    point (points on or near surfaces count their own surface as visible)."""
    from .geometry import project_batch

    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    count = np.zeros(len(pts), dtype=np.int64)
    for pose, intr in cameras:
        uv, depth, behind, inb = project_batch(pts, pose, intr)
        origin = pose.camera_center
        dirs = (pts - origin) / np.where(depth[:, None] > 0, depth[:, None], 1.0)
        best_t = np.full(len(pts), np.inf)
        for prim in scene:
            o_loc = prim.pose.world_to_camera(np.broadcast_to(origin, pts.shape))
            d_loc = dirs @ prim.pose.rotation.T
            if prim.kind == "sphere":
                t = _ray_sphere(o_loc, d_loc, prim.size[0])
            elif prim.kind == "box":
                t = _ray_box(o_loc, d_loc, prim.size)
            else:
                t = _ray_plane(o_loc, d_loc)
            best_t = np.minimum(best_t, t)
        unoccluded = best_t >= depth * (1.0 - 1e-9)
        count += (inb & ~behind & unoccluded).astype(np.int64)
    return count


def analytic_sdf(scene, x):
    """Exact signed distance to the scene union plus the nearest instance id.

    Ties go to the lower instance id. Accepts one point or an (n, 3) batch.
    """
    pts = np.asarray(x, dtype=np.float64).reshape(-1, 3)
    best = np.full(pts.shape[0], np.inf)
    who = np.zeros(pts.shape[0], dtype=np.int64)
    order = sorted(scene, key=lambda p: p.instance)
    for prim in order:
        local = prim.pose.world_to_camera(pts)
        d = prim.local_sdf(local)
        closer = d < best  # strict: earlier (lower id) wins ties
        best = np.where(closer, d, best)
        who = np.where(closer, prim.instance, who)
    if np.ndim(x) == 1:
        return float(best[0]), int(who[0])
    return best, who


def corner_cameras(center, *, radius=0.45, height=0.45, intr: Intrinsics | None = None,
                   top_down: bool = False):
    """Four cameras above the corners of a square workspace.

    With ``top_down`` they look straight down (fronto-parallel to the table);
    otherwise they look at the workspace center.
    """
    if intr is None:
        intr = Intrinsics(fx=600.0, fy=600.0, cx=319.5, cy=239.5, width=640, height=480)
    center = np.asarray(center, dtype=np.float64)
    cams = []
    for sx, sy in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        eye = center + np.array([sx * radius, sy * radius, height])
        if top_down:
            target = eye - np.array([0.0, 0.0, 1.0])
            pose = look_at_pose(eye, target, up=(0.0, 1.0, 0.0))
        else:
            pose = look_at_pose(eye, center)
        cams.append((pose, intr))
    return cams


def axis_cameras(center, distance, intr: Intrinsics):
    """Six cameras on the +-x/+-y/+-z axes looking at `center` (full coverage)."""
    center = np.asarray(center, dtype=np.float64)
    cams = []
    for axis in (np.array([1.0, 0, 0]), np.array([-1.0, 0, 0]),
                 np.array([0, 1.0, 0]), np.array([0, -1.0, 0]),
                 np.array([0, 0, 1.0]), np.array([0, 0, -1.0])):
        eye = center + distance * axis
        up = (0.0, 0.0, 1.0) if abs(axis[2]) < 0.5 else (0.0, 1.0, 0.0)
        cams.append((look_at_pose(eye, center, up=up), intr))
    return cams


def write_scene_dir(views, path, *, mu, delta) -> None:
    """Write views in the on-disk scene format (see sceneio)."""
    from . import sceneio
    sceneio.write_scene(path, views, mu=mu, delta=delta)
