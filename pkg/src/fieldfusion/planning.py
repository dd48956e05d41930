"""Rearrangement cost and sampling-based push planning (MPPI inside MPC).

The task cost compares keypoints projected into the virtual reference
camera against their goal-image correspondences (summed squared pixel
distance, evaluated at the horizon end only). MPPI perturbs a nominal
action sequence with Gaussian noise, scores rollouts through the dynamics,
and re-weights with exponentiated negative cost; the MPC loop re-perceives,
re-tracks, re-corresponds, and executes the first planned action each step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .correspondence import GoalSpec, goal_points
from .dynamics import PushAction
from .field import FusedField, build_field
from .geometry import project_batch
from .tracking import KeypointSet, TrackConfig, sample_keypoints, track_step


@dataclass(frozen=True)
class PlanConfig:
    horizon: int = 1
    samples: int = 128
    lam: float = 0.05             # MPPI temperature
    noise_sigma: tuple = (0.02, 0.02, 0.2, 0.02)   # (start_x, start_y, heading, length)
    iterations: int = 8
    seed: int = 0
    max_push: float = 0.05

    def __post_init__(self):
        if self.horizon < 1 or self.samples < 2 or self.lam <= 0:
            raise ValueError("invalid plan configuration")


def project_to_reference(points: np.ndarray, goal: GoalSpec) -> np.ndarray:
    """Project world keypoints into the virtual reference camera."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] == 0:
        return np.zeros((0, 2))
    uv, depth, behind, _ = project_batch(pts, goal.reference_pose, goal.reference_intr)
    if np.any(behind):
        raise ValueError("points behind the reference camera; check its pose")
    return uv


def cost(s_2d: np.ndarray, s_goal: np.ndarray) -> float:
    """Summed squared pixel distance between projections and goal points."""
    a = np.asarray(s_2d, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(s_goal, dtype=np.float64).reshape(-1, 2)
    if a.shape != b.shape:
        raise ValueError("point count mismatch")
    return float(np.sum((a - b) ** 2))


def _materialize(params: np.ndarray, cfg: PlanConfig, dynamics=None):
    """Clamp parameter rows into valid actions.

    Dynamics models owning a different action family expose
    ``action_from_params``; the default family is the planar push.
    """
    if dynamics is not None and hasattr(dynamics, "action_from_params"):
        return [dynamics.action_from_params(row) for row in params]
    actions = []
    for row in params:
        sx, sy, theta, length = row
        length = float(np.clip(length, 0.0, cfg.max_push))
        actions.append(PushAction.from_params((sx, sy, theta, length)))
    return actions


def rollout(dynamics, kps: KeypointSet, actions) -> KeypointSet:
    for a in actions:
        kps = dynamics.step(kps, a)
    return kps


def _table_point_from_pixel(pixel: np.ndarray, goal: GoalSpec):
    """Unproject a reference-camera pixel onto the z = 0 table plane."""
    intr = goal.reference_intr
    pose = goal.reference_pose
    ray_cam = np.array([(pixel[0] - intr.cx) / intr.fx,
                        (pixel[1] - intr.cy) / intr.fy, 1.0])
    ray = pose.rotation.T @ ray_cam
    origin = pose.camera_center
    if abs(ray[2]) < 1e-9:
        return None
    t = -origin[2] / ray[2]
    if t <= 0:
        return None
    return origin + t * ray


def _goal_directed_nominal(kps: KeypointSet, goal_xy, goal: GoalSpec,
                           cfg: PlanConfig, dynamics=None) -> np.ndarray:
    """Initial sequence: approach the object from behind, aimed at the goal.

    The mean goal pixel is dropped onto the table plane to estimate the push
    direction; when that fails the nominal degrades to a zero-length push at
    the keypoint centroid. Non-push action families (teleports) aim their
    leading parameters directly at the table target.
    """
    centroid3 = kps.points.mean(axis=0)
    centroid = centroid3[:2]
    target = _table_point_from_pixel(np.asarray(goal_xy).mean(axis=0), goal)
    if dynamics is not None and hasattr(dynamics, "action_from_params"):
        aim = centroid if target is None else target[:2]
        return np.tile(np.array([aim[0], aim[1], 0.0, 0.0]), (cfg.horizon, 1))
    if target is None or np.linalg.norm(target[:2] - centroid) < 1e-6:
        return np.tile(np.array([centroid[0], centroid[1], 0.0, 0.0]),
                       (cfg.horizon, 1))
    d = target[:2] - centroid
    d = d / np.linalg.norm(d)
    spread = float(np.max(np.linalg.norm(kps.points[:, :2] - centroid, axis=1)))
    start = centroid - (spread + 0.02) * d
    theta = float(np.arctan2(d[1], d[0]))
    return np.tile(np.array([start[0], start[1], theta, cfg.max_push * 0.7]),
                   (cfg.horizon, 1))


def _rollout_cost(dynamics, kps, actions, goal, goal_xy) -> float:
    try:
        cur = kps
        for a in actions:
            if hasattr(dynamics, "feasible") and not dynamics.feasible(cur, a):
                return np.inf
            cur = dynamics.step(cur, a)
        s2d = project_to_reference(cur.points, goal)
    except Exception:
        return np.inf
    return cost(s2d, goal_xy)


def mppi_weights(scores: np.ndarray, lam: float):
    """Exponentiated-cost weights, min-shifted so adding any constant to all
    scores changes nothing. Returns None when every rollout failed."""
    scores = np.asarray(scores, dtype=np.float64)
    finite = np.isfinite(scores)
    if not np.any(finite):
        return None
    shifted = np.where(finite, scores - scores[finite].min(), np.inf)
    weights = np.exp(-shifted / lam)
    total = weights.sum()
    if total <= 0:
        return None
    return weights / total


def mppi_plan(dynamics, kps: KeypointSet, goal_pts, goal: GoalSpec,
              cfg: PlanConfig, nominal: np.ndarray | None = None):
    """Optimize a length-`horizon` push sequence by path-integral updates.

    Per iteration: sample Gaussian perturbations around the nominal
    parameter sequence, roll out, score terminal cost, softmax-weight with
    temperature `lam` (max-shifted, so adding a constant to all scores
    changes nothing), and move the nominal by the weighted perturbation
    mean. Failed rollouts score +inf and drop out of the update. Fully
    reproducible from cfg.seed. Returns (actions, predicted terminal cost).
    """
    goal_xy = np.asarray(goal_pts.points_2d if hasattr(goal_pts, "points_2d")
                         else goal_pts, dtype=np.float64)
    sigma = np.asarray(cfg.noise_sigma, dtype=np.float64).reshape(1, 1, 4)
    rng = np.random.default_rng(cfg.seed)
    if nominal is None:
        nominal = _goal_directed_nominal(kps, goal_xy, goal, cfg, dynamics)
    else:
        nominal = np.array(nominal, dtype=np.float64).reshape(cfg.horizon, 4)

    best_params = nominal.copy()
    best_score = _rollout_cost(dynamics, kps, _materialize(nominal, cfg, dynamics), goal, goal_xy)
    for _ in range(cfg.iterations):
        eps = rng.normal(size=(cfg.samples, cfg.horizon, 4)) * sigma
        scores = np.empty(cfg.samples)
        for s in range(cfg.samples):
            params = nominal + eps[s]
            scores[s] = _rollout_cost(dynamics, kps,
                                      _materialize(params, cfg, dynamics),
                                      goal, goal_xy)
            if scores[s] < best_score:
                best_score = scores[s]
                best_params = params
        weights = mppi_weights(scores, cfg.lam)
        if weights is None:
            continue
        nominal = nominal + np.einsum("s,shp->hp", weights, eps)

    # the weighted average can drift infeasible or regress; keep the best
    # sampled sequence as a fallback
    final_score = _rollout_cost(dynamics, kps, _materialize(nominal, cfg, dynamics),
                                goal, goal_xy)
    if final_score <= best_score:
        return _materialize(nominal, cfg, dynamics), final_score
    return _materialize(best_params, cfg, dynamics), best_score


@dataclass
class PlanResult:
    status: str               # 'success' | 'budget' | 'lost'
    records: list             # one dict per MPC step
    keypoints: KeypointSet | None = None

    def executed_actions(self):
        return [r["action"] for r in self.records if r.get("action") is not None]


def mpc_loop(env, perception, goal: GoalSpec, cfg: PlanConfig, *,
             dynamics, instance: int, n_keypoints: int = 40,
             tau_surf: float | None = None,
             track_cfg: TrackConfig = TrackConfig(),
             threshold: float | None = None,
             max_steps: int = 20,
             on_step=None) -> PlanResult:
    """Perceive, track, correspond, plan, and execute until the goal cost
    threshold is met or the step budget runs out.

    `env.observe()` must return fresh views after each `env.execute(action)`;
    `perception` maps views to a FusedField. The default threshold allows
    4 px^2 of residual per keypoint. Lost tracking terminates with status
    'lost'. `on_step(step, field, kps)` fires after each perception pass
    (snapshot hooks and the like).
    """
    if threshold is None:
        threshold = 4.0 * n_keypoints
    records = []
    kps = None
    seed_seq = np.random.SeedSequence([cfg.seed, 0xC0DE])
    step_seeds = seed_seq.generate_state(max_steps + 1)

    for step in range(max_steps + 1):
        views = env.observe()
        field = perception(views)
        if kps is None:
            kps = sample_keypoints(field, instance, n_keypoints, tau_surf)
        else:
            kps = track_step(field, kps, track_cfg)
            if kps.lost:
                return PlanResult("lost", records, kps)
        if on_step is not None:
            on_step(step, field, kps)
        gpts = goal_points(field, kps, goal)
        s2d = project_to_reference(kps.points, goal)
        c = cost(s2d, gpts.points_2d)
        if c < threshold:
            records.append({"step": step, "cost": c, "action": None})
            return PlanResult("success", records, kps)
        if step == max_steps:
            return PlanResult("budget", records, kps)
        step_cfg = PlanConfig(horizon=cfg.horizon, samples=cfg.samples, lam=cfg.lam,
                              noise_sigma=cfg.noise_sigma, iterations=cfg.iterations,
                              seed=int(step_seeds[step]), max_push=cfg.max_push)
        actions, predicted = mppi_plan(dynamics, kps, gpts, goal, step_cfg)
        env.execute(actions[0])
        records.append({"step": step, "cost": c, "predicted": predicted,
                        "action": action_record(actions[0])})
    return PlanResult("budget", records, kps)


def action_record(a: PushAction) -> dict:
    return {"start": [a.start[0], a.start[1]],
            "direction": [a.direction[0], a.direction[1]],
            "length": a.length}


def write_jsonl(records, path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


class BlockPushEnv:
    """Built-in ground-truth environment: one rigid block on a ground plane,
    observed by synthetic cameras, pushed with the quasi-static sweep model.

    The executed action moves the block via the same contact geometry the
    rigid pusher dynamics uses, applied to the block's footprint corners;
    observations re-render the scene at the block's current position.
    """

    def __init__(self, *, block_center, block_half_extents, cameras,
                 feature_spec, pusher_params=None, plane_height=0.0,
                 mu=0.02, delta=1e-4):
        from .dynamics import PusherParams, pusher_step
        from . import synth
        self._synth = synth
        self._pusher_step = pusher_step
        self.params = pusher_params or PusherParams(radius=0.01, rigid_group=True)
        self.center = np.asarray(block_center, dtype=np.float64).copy()
        self.half = np.asarray(block_half_extents, dtype=np.float64)
        self.cameras = cameras
        self.spec = feature_spec
        self.plane_height = plane_height
        self.mu = mu
        self.delta = delta

    def _scene(self, center):
        return [
            self._synth.ground_plane(height=self.plane_height, extent=(1.0, 1.0),
                                     category=50, instance=1),
            self._synth.box(center, self.half, category=1, instance=2),
        ]

    @property
    def block_instance(self) -> int:
        return 2

    def observe(self):
        return self._synth.render_views(self._scene(self.center), self.cameras, self.spec)

    def execute(self, action: PushAction) -> None:
        # contact proxies: a grid over the block footprint, swept rigidly
        from .dynamics import start_overlaps
        cx, cy = self.center[:2]
        hx, hy = self.half[:2]
        gx, gy = np.meshgrid(np.linspace(cx - hx, cx + hx, 7),
                             np.linspace(cy - hy, cy + hy, 7))
        proxies = np.stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)], axis=1)
        stub = KeypointSet(points=proxies, anchor_points=proxies,
                           anchor_features=np.zeros((len(proxies), 1)),
                           instance=self.block_instance)
        if start_overlaps(stub, action, self.params):
            return  # the pusher cannot descend into the block; nothing moves
        moved = self._pusher_step(stub, action, self.params)
        delta = moved.points[0] - proxies[0]
        self.center[:2] += delta[:2]

    def perception(self, views) -> FusedField:
        return build_field(views, mu=self.mu, delta=self.delta)
