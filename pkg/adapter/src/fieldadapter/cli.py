"""CLI mirroring the primary `synth` output contract: scene directories in,
model-extracted scene directories out.

Input manifests are JSON:

    {"views": [{"rgb": "v0.png", "depth": "v0_depth.npy",
                "camera": {"intrinsics": {...}, "rotation": [[...]],
                            "translation": [...]}}, ...],
     "mu": 0.02, "delta": 1e-4}

Video manifests hold a "frames" list of such view lists.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .backbones import BACKBONES, ModelLoadError
from .extract import ExtractConfig, extract_frame, propagate_masks
from .segment import SEGMENTERS


def _load_view_files(entries, base: Path):
    from PIL import Image

    rgbs, depths, cameras = [], [], []
    for entry in entries:
        rgbs.append(np.asarray(Image.open(base / entry["rgb"])))
        dpath = base / entry["depth"]
        depths.append(np.load(dpath) if dpath.suffix == ".npy"
                      else np.asarray(Image.open(dpath), dtype=np.float64))
        cameras.append(entry["camera"])
    return rgbs, depths, cameras


def _config_from_args(args, manifest) -> ExtractConfig:
    return ExtractConfig(prompts=tuple(args.prompt or ()), dim=args.dim,
                         patch=args.patch, backbone=args.backbone,
                         segmenter=args.segmenter, device=args.device,
                         mu=float(manifest.get("mu", 0.02)),
                         delta=float(manifest.get("delta", 1e-4)),
                         seed=args.seed)


def _build_parser():
    p = argparse.ArgumentParser(prog="fieldadapter",
                                description="RGBD captures -> scene directories")
    p.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("extract", "one multi-view frame"),
                        ("propagate", "a video of frames with consistent ids")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("manifest", help="input manifest JSON")
        sp.add_argument("-o", "--output", required=True)
        sp.add_argument("--dim", type=int, default=32)
        sp.add_argument("--patch", type=int, default=8)
        sp.add_argument("--prompt", action="append",
                        help="open-vocabulary prompt (repeatable)")
        sp.add_argument("--backbone", choices=sorted(BACKBONES), default="patch-projection")
        sp.add_argument("--segmenter", choices=sorted(SEGMENTERS), default="color-regions")
        sp.add_argument("--device", default="cpu")
    return p


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    manifest_path = Path(args.manifest)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: cannot read manifest {manifest_path}: {e}", file=sys.stderr)
        return 2
    cfg = _config_from_args(args, manifest)
    base = manifest_path.parent
    try:
        if args.command == "extract":
            rgbs, depths, cameras = _load_view_files(manifest["views"], base)
            extract_frame(rgbs, depths, cameras, cfg, args.output)
            print(f"wrote scene directory {args.output}")
        else:
            frames = [(_load_view_files(f, base)) for f in manifest["frames"]]
            paths, diverged = propagate_masks(frames, cfg, args.output)
            print(f"wrote {len(paths)} frame directories under {args.output}")
            if diverged:
                print(f"warning: diverged ids per frame: {diverged}", file=sys.stderr)
        return 0
    except ModelLoadError as e:
        print(f"error: model load failure: {e}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
