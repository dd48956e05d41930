"""Command-line surface: synth, fuse, mesh, track, correspond, plan.

Exit codes: 0 success, 1 usage error, 2 data error (malformed scene or
config files, with the offending file named).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import correspondence, dynamics, field, mesh, planning, sceneio, synth, tracking
from .geometry import Intrinsics, Pose, look_at_pose


class _DataError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fieldfusion",
                                description="Fused multi-view field toolchain")
    p.add_argument("--config", help="JSON file with defaults for subcommand flags")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, help="worker threads for field queries")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="render a synthetic scene directory")
    sp.add_argument("description", help="scene description JSON")
    sp.add_argument("-o", "--output", required=True, help="scene directory to write")

    fp = sub.add_parser("fuse", help="build the field and print stats")
    fp.add_argument("scene", help="scene directory")
    fp.add_argument("--probe-cell", type=float, default=0.01)
    fp.add_argument("--grid-dump", help="write probe-grid d/observed arrays (.npy pair)")

    mp = sub.add_parser("mesh", help="extract a decorated surface mesh")
    mp.add_argument("scene")
    mp.add_argument("--cell", type=float, default=0.004)
    mp.add_argument("--margin", type=float, default=0.01)
    mp.add_argument("--color", choices=["mask", "pca"], default="mask")
    mp.add_argument("-o", "--output", required=True, help="PLY path")

    tp = sub.add_parser("track", help="track keypoints across scene directories")
    tp.add_argument("scenes", nargs="+", help="ordered frame scene directories")
    tp.add_argument("--instance", type=int, required=True)
    tp.add_argument("--keypoints", type=int, default=40)
    tp.add_argument("--tau", type=float, help="surface band for seeding (default mu/2)")
    tp.add_argument("--step", type=float, default=5e-3)
    tp.add_argument("--iterations", type=int, default=100)
    tp.add_argument("--lambda-dist", type=float, default=1.0)
    tp.add_argument("--no-rigid", action="store_true")
    tp.add_argument("-o", "--output", required=True, help="trajectory CSV")

    cp = sub.add_parser("correspond", help="map keypoints to goal-image points")
    cp.add_argument("scene")
    cp.add_argument("--goal-features", required=True, help="map file (f32)")
    cp.add_argument("--goal-masks", help="map file (u8 ids)")
    cp.add_argument("--goal-camera", help="camera.json for the reference view "
                                          "(default: top-down over the workspace)")
    cp.add_argument("--instance", type=int, required=True)
    cp.add_argument("--keypoints", type=int, default=40)
    cp.add_argument("--sharpness", type=float, default=correspondence.DEFAULT_SHARPNESS)
    cp.add_argument("--heatmaps", help="directory for per-keypoint PNG heatmaps")
    cp.add_argument("-o", "--output", required=True, help="goal points CSV")

    pp = sub.add_parser("plan", help="run the MPC loop on the built-in pusher task")
    pp.add_argument("task", help="task description JSON")
    pp.add_argument("--dynamics", default="pusher-rigid",
                    choices=dynamics.available_dynamics())
    pp.add_argument("--steps", type=int, default=20)
    pp.add_argument("--snapshots", help="directory for per-step PLY snapshots")
    pp.add_argument("-o", "--output", required=True, help="trajectory log (JSON lines)")
    return p


def _load_config(args) -> None:
    if not args.config:
        return
    try:
        overrides = json.loads(Path(args.config).read_text())
    except OSError as e:
        raise _DataError(f"cannot read config {args.config}: {e}") from e
    except json.JSONDecodeError as e:
        raise _DataError(f"bad JSON in config {args.config}: {e}") from e
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) in (None, parser_default(attr)):
            setattr(args, attr, value)


_PARSER_DEFAULTS: dict = {}


def parser_default(attr):
    return _PARSER_DEFAULTS.get(attr)


def _intr_from_json(obj) -> Intrinsics:
    return Intrinsics(fx=float(obj["fx"]), fy=float(obj["fy"]),
                      cx=float(obj["cx"]), cy=float(obj["cy"]),
                      width=int(obj["width"]), height=int(obj["height"]))


def _cameras_from_json(obj) -> list:
    cams = []
    for cam in obj:
        intr = _intr_from_json(cam["intrinsics"])
        if "rotation" in cam:
            pose = Pose(np.array(cam["rotation"], dtype=np.float64),
                        np.array(cam["translation"], dtype=np.float64))
        else:
            pose = look_at_pose(np.array(cam["eye"], dtype=np.float64),
                                np.array(cam["target"], dtype=np.float64),
                                up=tuple(cam.get("up", (0.0, 0.0, 1.0))))
        cams.append((pose, intr))
    return cams


def _primitives_from_json(obj) -> list:
    prims = []
    for i, prim in enumerate(obj):
        kind = prim["kind"]
        category = int(prim.get("category", 1))
        instance = int(prim.get("instance", i + 1))
        if kind == "sphere":
            prims.append(synth.sphere(prim["center"], float(prim["radius"]),
                                      category=category, instance=instance))
        elif kind == "box":
            prims.append(synth.box(prim["center"], prim["half_extents"],
                                   category=category, instance=instance,
                                   yaw=float(prim.get("yaw", 0.0))))
        elif kind == "plane":
            prims.append(synth.ground_plane(height=float(prim.get("height", 0.0)),
                                            extent=tuple(prim.get("extent", (1.0, 1.0))),
                                            category=category, instance=instance))
        else:
            raise _DataError(f"unknown primitive kind {kind!r}")
    return prims


def _cmd_synth(args) -> int:
    try:
        desc = json.loads(Path(args.description).read_text())
    except OSError as e:
        raise _DataError(f"cannot read {args.description}: {e}") from e
    except json.JSONDecodeError as e:
        raise _DataError(f"bad JSON in {args.description}: {e}") from e
    try:
        prims = _primitives_from_json(desc["primitives"])
        cams = _cameras_from_json(desc["cameras"])
        spec = synth.ProceduralFeatureSpec(dim=int(desc.get("feature_dim", 32)),
                                           seed=int(desc.get("feature_seed", args.seed)),
                                           noise_std=float(desc.get("noise_std", 0.0)))
        views = synth.render_views(prims, cams, spec,
                                   depth_noise_std=float(desc.get("depth_noise_std", 0.0)),
                                   seed=args.seed)
        sceneio.write_scene(args.output, views,
                            mu=float(desc.get("mu", field.DEFAULT_MU)),
                            delta=float(desc.get("delta", field.DEFAULT_DELTA)))
    except (KeyError, TypeError, ValueError) as e:
        raise _DataError(f"bad scene description {args.description}: {e}") from e
    print(f"wrote scene with {len(views)} views to {args.output}")
    return 0


def _read_field(path):
    views, params = sceneio.read_scene(path)
    return field.build_field(views, mu=params.mu, delta=params.delta), params


def _cmd_fuse(args) -> int:
    fld, params = _read_field(args.scene)
    pts = tracking._default_grid_points(fld, args.probe_cell)
    batch = field.evaluate_batch(fld, pts, with_features=False)
    frac = float(batch.observed.mean())
    d_obs = batch.d[batch.observed]
    print(f"views: {params.k}  feature_dim: {params.n}  instances: {params.m}")
    print(f"mu: {params.mu}  delta: {params.delta}")
    print(f"probe grid: {len(pts)} points at {args.probe_cell} m")
    print(f"observed fraction: {frac:.4f}")
    if d_obs.size:
        print(f"fused d range: [{d_obs.min():.5f}, {d_obs.max():.5f}] m")
    if args.grid_dump:
        base = Path(args.grid_dump)
        np.save(base.with_suffix(".d.npy"), batch.d)
        np.save(base.with_suffix(".observed.npy"), batch.observed)
        print(f"dumped probe arrays next to {base}")
    return 0


def _workspace_grid(fld, cell, margin):
    pts = tracking._default_grid_points(fld, max(cell * 4, 0.01))
    batch = field.evaluate_batch(fld, pts, with_features=False)
    near = batch.observed & (np.abs(batch.d) < fld.mu)
    if not np.any(near):
        raise _DataError("no observed surface band in the scene")
    lo = pts[near].min(axis=0) - margin
    hi = pts[near].max(axis=0) + margin
    dims = tuple(int(np.ceil((hi[k] - lo[k]) / cell)) + 1 for k in range(3))
    return mesh.GridSpec(origin=lo, cell=cell, dims=dims)


def _cmd_mesh(args) -> int:
    fld, _ = _read_field(args.scene)
    grid = _workspace_grid(fld, args.cell, args.margin)
    m = mesh.extract_mesh(fld, grid)
    m = mesh.decorate(m, fld)
    if args.color == "pca" and not m.empty:
        m.colors = mesh.pca_colorize(m.features)
    mesh.export_ply(m, args.output)
    print(f"wrote {len(m.vertices)} vertices / {len(m.triangles)} triangles to {args.output}")
    return 0


def _cmd_track(args) -> int:
    cfg = tracking.TrackConfig(step=args.step, max_iterations=args.iterations,
                               lambda_dist=args.lambda_dist, rigid=not args.no_rigid)
    fld0, _ = _read_field(args.scenes[0])
    try:
        kps = tracking.sample_keypoints(fld0, args.instance, args.keypoints, args.tau)
    except ValueError as e:
        raise _DataError(str(e)) from e
    rows = [(0, kps)]
    for fi, scene_dir in enumerate(args.scenes[1:], start=1):
        fld, _ = _read_field(scene_dir)
        kps = tracking.track_step(fld, kps, cfg)
        rows.append((fi, kps))
        if kps.lost:
            break
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "point", "x", "y", "z", "lost"])
        for fi, k in rows:
            for j, p in enumerate(k.points):
                writer.writerow([fi, j, repr(float(p[0])), repr(float(p[1])),
                                 repr(float(p[2])), int(k.lost)])
    print(f"tracked {len(kps)} keypoints over {len(rows)} frames -> {args.output}")
    return 0


def _default_reference_camera(fld) -> tuple[Pose, Intrinsics]:
    pts = tracking._default_grid_points(fld, 0.02)
    center = pts.mean(axis=0)
    span = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    eye = center + np.array([0.0, 0.0, max(2.5 * span, 0.3)])
    intr = Intrinsics(fx=600.0, fy=600.0, cx=319.5, cy=239.5, width=640, height=480)
    return look_at_pose(eye, center, up=(0.0, 1.0, 0.0)), intr


def _cmd_correspond(args) -> int:
    fld, _ = _read_field(args.scene)
    feats = sceneio.read_map(args.goal_features)
    if feats.ndim == 2:
        feats = feats[:, :, None]
    mask_ids = sceneio.read_map(args.goal_masks) if args.goal_masks else None
    if args.goal_camera:
        cam_obj = json.loads(Path(args.goal_camera).read_text())
        intr = _intr_from_json(cam_obj["intrinsics"])
        pose = Pose(np.array(cam_obj["rotation"], dtype=np.float64),
                    np.array(cam_obj["translation"], dtype=np.float64))
    else:
        pose, intr = _default_reference_camera(fld)
    goal = correspondence.GoalSpec(goal_features=feats, reference_pose=pose,
                                   reference_intr=intr, sharpness=args.sharpness,
                                   goal_mask_ids=mask_ids)
    try:
        kps = tracking.sample_keypoints(fld, args.instance, args.keypoints)
        gpts = correspondence.goal_points(fld, kps, goal,
                                          return_heatmaps=bool(args.heatmaps))
    except ValueError as e:
        raise _DataError(str(e)) from e
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point", "u", "v"])
        for j, (u, v) in enumerate(gpts.points_2d):
            writer.writerow([j, repr(float(u)), repr(float(v))])
    if args.heatmaps:
        from PIL import Image
        outdir = Path(args.heatmaps)
        outdir.mkdir(parents=True, exist_ok=True)
        for j, hm in enumerate(gpts.heatmaps):
            img = (hm / hm.max() * 255.0).astype(np.uint8) if hm.max() > 0 \
                else np.zeros_like(hm, dtype=np.uint8)
            Image.fromarray(img, mode="L").save(outdir / f"keypoint_{j:03d}.png")
    print(f"wrote {len(gpts.points_2d)} goal points to {args.output}")
    return 0


def _cmd_plan(args) -> int:
    try:
        task = json.loads(Path(args.task).read_text())
    except OSError as e:
        raise _DataError(f"cannot read {args.task}: {e}") from e
    except json.JSONDecodeError as e:
        raise _DataError(f"bad JSON in {args.task}: {e}") from e

    spec = synth.ProceduralFeatureSpec(dim=int(task.get("feature_dim", 32)),
                                       seed=int(task.get("feature_seed", 0)))
    center = np.asarray(task.get("block_center", (0.0, 0.0, 0.02)), dtype=np.float64)
    half = np.asarray(task.get("block_half_extents", (0.03, 0.03, 0.02)), dtype=np.float64)
    ws_center = np.array([center[0], center[1], 0.0])
    cams = synth.corner_cameras(ws_center, radius=float(task.get("camera_radius", 0.35)),
                                height=float(task.get("camera_height", 0.4)))
    env = planning.BlockPushEnv(block_center=center, block_half_extents=half,
                                cameras=cams, feature_spec=spec,
                                mu=float(task.get("mu", field.DEFAULT_MU)),
                                delta=float(task.get("delta", field.DEFAULT_DELTA)))

    goal_offset = np.asarray(task.get("goal_offset", (0.10, 0.0)), dtype=np.float64)
    goal_center = center + np.array([goal_offset[0], goal_offset[1], 0.0])
    ref_pose, ref_intr = _plan_reference_camera(ws_center, goal_center)
    goal_views = synth.render_views(env._scene(goal_center), [(ref_pose, ref_intr)], spec)
    goal = correspondence.GoalSpec(goal_features=goal_views[0].features,
                                   reference_pose=ref_pose, reference_intr=ref_intr,
                                   goal_mask_ids=goal_views[0].mask_ids)

    cfg = planning.PlanConfig(horizon=int(task.get("horizon", 1)),
                              samples=int(task.get("samples", 128)),
                              lam=float(task.get("lambda", 0.05)),
                              iterations=int(task.get("iterations", 8)),
                              seed=args.seed,
                              max_push=float(task.get("max_push", 0.03)))
    dyn = dynamics.get_dynamics(args.dynamics)

    on_step = None
    if args.snapshots:
        outdir = Path(args.snapshots)
        outdir.mkdir(parents=True, exist_ok=True)

        def on_step(step, fld, kps):
            grid = _workspace_grid(fld, 0.005, 0.01)
            m = mesh.decorate(mesh.extract_mesh(fld, grid), fld)
            mesh.export_ply(m, outdir / f"step_{step:03d}.ply")

    result = planning.mpc_loop(env, env.perception, goal, cfg, dynamics=dyn,
                               instance=env.block_instance,
                               n_keypoints=int(task.get("keypoints", 40)),
                               max_steps=args.steps, on_step=on_step)
    planning.write_jsonl(result.records, args.output)
    print(f"status: {result.status} after {len(result.records)} records -> {args.output}")
    return 0 if result.status in ("success", "budget") else 2


def _plan_reference_camera(ws_center, goal_center):
    mid = (np.asarray(ws_center) + np.asarray(goal_center)) / 2.0
    eye = np.array([mid[0], mid[1], 0.6])
    intr = Intrinsics(fx=600.0, fy=600.0, cx=319.5, cy=239.5, width=640, height=480)
    return look_at_pose(eye, np.array([mid[0], mid[1], 0.0]), up=(0.0, 1.0, 0.0)), intr


_COMMANDS = {
    "synth": _cmd_synth,
    "fuse": _cmd_fuse,
    "mesh": _cmd_mesh,
    "track": _cmd_track,
    "correspond": _cmd_correspond,
    "plan": _cmd_plan,
}


def cli_dispatch(argv) -> int:
    """Parse argv (excluding the program name) and run one subcommand."""
    parser = _build_parser()
    for action in parser._actions:
        _PARSER_DEFAULTS[action.dest] = action.default
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse uses exit status 2 for usage errors; our contract says 1
        return 0 if e.code in (0, None) else 1
    try:
        _load_config(args)
        if args.threads:
            import numba
            numba.set_num_threads(max(1, args.threads))
        return _COMMANDS[args.command](args)
    except sceneio.SceneFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except _DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
