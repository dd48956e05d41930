"""Pluggable keypoint dynamics, with a built-in quasi-static planar pusher.

The pusher sweeps a disc of radius ``radius + band`` from a start point
along a direction on the table plane. Granular mode displaces each swept
point independently to the front of the final disc along the push
direction; rigid mode translates the whole set by the single smallest
vector that clears every swept point. Heights (z) are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .tracking import KeypointSet


@dataclass(frozen=True)
class PushAction:
    """One planar push: sweep from `start` along unit `direction` for `length`."""

    start: np.ndarray       # (2,) world xy, meters
    direction: np.ndarray   # (2,) unit vector
    length: float           # meters, >= 0

    def __post_init__(self):
        s = np.asarray(self.start, dtype=np.float64).reshape(2)
        d = np.asarray(self.direction, dtype=np.float64).reshape(2)
        if abs(np.linalg.norm(d) - 1.0) > 1e-6:
            raise ValueError("direction must be a unit vector")
        if self.length < 0:
            raise ValueError("length must be >= 0")
        object.__setattr__(self, "start", s)
        object.__setattr__(self, "direction", d)

    @classmethod
    def from_params(cls, params) -> "PushAction":
        """(start_x, start_y, heading, length) -> action; length clamped at 0."""
        sx, sy, theta, length = (float(p) for p in np.asarray(params).reshape(4))
        return cls(np.array([sx, sy]), np.array([np.cos(theta), np.sin(theta)]),
                   max(length, 0.0))

    def params(self) -> np.ndarray:
        return np.array([self.start[0], self.start[1],
                         float(np.arctan2(self.direction[1], self.direction[0])),
                         self.length])


@dataclass(frozen=True)
class TeleportAction:
    """Pick-and-place primitive: set the point set's footprint pose directly.

    `target` is the desired 2D centroid; `yaw` rotates the set about its
    centroid before placement. Parameterized like a push (4 numbers) so the
    same sampling-based planner optimizes either action family.
    """

    target: np.ndarray     # (2,) world xy, meters
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "target",
                           np.asarray(self.target, dtype=np.float64).reshape(2))

    @classmethod
    def from_params(cls, params) -> "TeleportAction":
        tx, ty, yaw, _unused = (float(p) for p in np.asarray(params).reshape(4))
        return cls(np.array([tx, ty]), yaw)

    def params(self) -> np.ndarray:
        return np.array([self.target[0], self.target[1], self.yaw, 0.0])


@dataclass(frozen=True)
class PusherParams:
    radius: float = 0.01
    band: float = 0.0          # extra contact margin added to the radius
    rigid_group: bool = True

    def __post_init__(self):
        if self.radius <= 0 or self.band < 0:
            raise ValueError("radius must be positive and band >= 0")


class DynamicsFn(Protocol):
    """Deterministic keypoint dynamics: step(kps, action) preserves n_s."""

    name: str
    deterministic: bool

    def step(self, kps: KeypointSet, action: PushAction) -> KeypointSet: ...


def _sweep_geometry(pts_xy: np.ndarray, action: PushAction, reach: float):
    """Forward/lateral coordinates of points in the sweep frame plus contact set."""
    g = action.direction
    nrm = np.array([-g[1], g[0]])
    rel = pts_xy - action.start
    fwd = rel @ g
    lat = rel @ nrm
    # distance to the segment [start, start + length * g]
    clamped = np.clip(fwd, 0.0, action.length)
    dist = np.sqrt((fwd - clamped) ** 2 + lat ** 2)
    return fwd, lat, dist < reach


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _convex_hull_2d(pts: np.ndarray) -> np.ndarray:
    """Andrew monotone chain; returns hull vertices in counterclockwise order."""
    pts = np.unique(pts.round(12), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        out: list = []
        for p in seq:
            while len(out) >= 2 and _cross2(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _distance_to_hull(hull: np.ndarray, p: np.ndarray) -> float:
    """Signed-ish clearance: 0 inside the hull, else distance to its boundary."""
    if len(hull) == 1:
        return float(np.linalg.norm(p - hull[0]))
    if len(hull) == 2:
        a, b = hull
        t = np.clip(np.dot(p - a, b - a) / max(np.dot(b - a, b - a), 1e-30), 0, 1)
        return float(np.linalg.norm(p - (a + t * (b - a))))
    inside = True
    best = np.inf
    n = len(hull)
    for i in range(n):
        a = hull[i]
        b = hull[(i + 1) % n]
        if _cross2(b - a, p - a) < 0:
            inside = False
        t = np.clip(np.dot(p - a, b - a) / max(np.dot(b - a, b - a), 1e-30), 0, 1)
        best = min(best, float(np.linalg.norm(p - (a + t * (b - a)))))
    return 0.0 if inside else best


def start_overlaps(kps: KeypointSet, action: PushAction,
                   params: PusherParams = PusherParams(),
                   margin: float = 0.0) -> bool:
    """True when the pusher would have to descend into (or too close to) the
    object, approximated by the convex hull of the point set's footprint."""
    reach = params.radius + params.band + margin
    hull = _convex_hull_2d(np.asarray(kps.points)[:, :2])
    return _distance_to_hull(hull, np.asarray(action.start)) < reach


def pusher_step(kps: KeypointSet, action: PushAction,
                params: PusherParams = PusherParams()) -> KeypointSet:
    """Quasi-static disc sweep over the keypoints' table-plane coordinates.

    A zero-length push is exactly the identity.
    """
    if action.length == 0.0:
        return kps.with_points(np.array(kps.points), frame=kps.frame)
    reach = params.radius + params.band
    pts = np.array(kps.points)
    fwd, lat, swept = _sweep_geometry(pts[:, :2], action, reach)
    if not np.any(swept):
        return kps.with_points(pts, frame=kps.frame)
    g = action.direction
    nrm = np.array([-g[1], g[0]])
    end = action.start + action.length * g
    front = np.sqrt(np.maximum(reach ** 2 - lat[swept] ** 2, 0.0))
    if params.rigid_group:
        # smallest translation along g that clears every swept point
        push = np.max(action.length + front - fwd[swept])
        pts[:, :2] += push * g
    else:
        pts[swept, 0] = end[0] + front * g[0] + lat[swept] * nrm[0]
        pts[swept, 1] = end[1] + front * g[1] + lat[swept] * nrm[1]
    return kps.with_points(pts, frame=kps.frame)


@dataclass(frozen=True)
class PusherDynamics:
    """DynamicsFn wrapper around `pusher_step` with fixed parameters."""

    name: str
    params: PusherParams
    deterministic: bool = True

    def step(self, kps: KeypointSet, action: PushAction) -> KeypointSet:
        return pusher_step(kps, action, self.params)

    def feasible(self, kps: KeypointSet, action: PushAction) -> bool:
        """Pushes may not start inside the object (no spawn penetration).

        The keypoint hull understates the true footprint, so a small safety
        margin keeps model feasibility conservative against the real object.
        """
        return action.length == 0.0 or not start_overlaps(kps, action, self.params,
                                                          margin=0.005)


def teleport_step(kps: KeypointSet, action: TeleportAction) -> KeypointSet:
    """Rigidly re-place the set: rotate by yaw about the centroid, then move
    the centroid's xy to the target. Heights are preserved."""
    pts = np.array(kps.points)
    centroid = pts.mean(axis=0)
    c, s = np.cos(action.yaw), np.sin(action.yaw)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    moved = (pts - centroid) @ R.T + centroid
    moved[:, 0] += action.target[0] - centroid[0]
    moved[:, 1] += action.target[1] - centroid[1]
    return kps.with_points(moved, frame=kps.frame)


@dataclass(frozen=True)
class TeleportDynamics:
    """DynamicsFn for the pick-and-place primitive."""

    name: str = "teleport-rigid"
    deterministic: bool = True

    def step(self, kps: KeypointSet, action) -> KeypointSet:
        return teleport_step(kps, action)

    def action_from_params(self, params):
        return TeleportAction.from_params(params)


_REGISTRY: dict = {}


def register_dynamics(name: str, fn) -> str:
    """Register a dynamics model for lookup by name (CLI/config surface)."""
    if name in _REGISTRY:
        raise ValueError(f"dynamics {name!r} already registered")
    _REGISTRY[name] = fn
    return name


def get_dynamics(name: str):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown dynamics {name!r}; available: "
                       f"{sorted(_REGISTRY)}") from None


def available_dynamics():
    return sorted(_REGISTRY)


register_dynamics("pusher-rigid", PusherDynamics("pusher-rigid", PusherParams(rigid_group=True)))
register_dynamics("pusher-granular",
                  PusherDynamics("pusher-granular", PusherParams(rigid_group=False)))
register_dynamics("teleport-rigid", TeleportDynamics())
