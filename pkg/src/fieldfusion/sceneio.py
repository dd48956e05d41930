"""Bit-exact on-disk scene format.

A scene directory holds one subdirectory per view plus a scene.json:

    scene.json            {"k", "n", "m", "mu", "delta", "views": [...]}
    <view>/camera.json    intrinsics + world-to-camera pose (row-major R, t)
    <view>/depth.f32      map file, H x W x 1 float32, meters (0 = no return)
    <view>/feat.f32       map file, H x W x N float32
    <view>/mask.u8        map file, H x W x 1 uint8 instance ids (< m)

Map files share one header: magic "D3FM", then version, H, W, C, and a
dtype tag as little-endian u32, followed by the row-major payload. Masks
are stored as id maps rather than one-hot planes for size; expansion to
one-hot happens at load. Every format is endian-fixed so files written on
any platform read identically on any other.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .field import CameraView
from .geometry import Intrinsics, Pose

MAGIC = b"D3FM"
VERSION = 1
DTYPE_F32 = 0
DTYPE_U8 = 1
_DTYPES = {DTYPE_F32: np.dtype("<f4"), DTYPE_U8: np.dtype("u1")}
_TAGS = {np.dtype("<f4"): DTYPE_F32, np.dtype("u1"): DTYPE_U8}


class SceneFormatError(ValueError):
    """Malformed scene data; `code` names the failure, `path` the file."""

    def __init__(self, code: str, path, detail: str = ""):
        self.code = code
        self.path = str(path)
        msg = f"{code}: {path}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class SceneParams:
    mu: float
    delta: float
    k: int
    n: int
    m: int


def write_map(path, array: np.ndarray) -> None:
    """Write one H x W or H x W x C map in the binary map format."""
    arr = np.asarray(array)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError("map must be HxW or HxWxC")
    if arr.dtype == np.uint8:
        tag = DTYPE_U8
        payload = np.ascontiguousarray(arr)
    else:
        tag = DTYPE_F32
        payload = np.ascontiguousarray(arr, dtype="<f4")
    h, w, c = arr.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIIII", VERSION, h, w, c, tag))
        fh.write(payload.tobytes())


def read_map(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise SceneFormatError("missing-file", path, str(e)) from e
    if len(data) < 24 or data[:4] != MAGIC:
        raise SceneFormatError("bad-magic", path)
    version, h, w, c, tag = struct.unpack("<IIIII", data[4:24])
    if version != VERSION:
        raise SceneFormatError("bad-version", path, f"version {version}")
    if tag not in _DTYPES:
        raise SceneFormatError("bad-dtype", path, f"tag {tag}")
    dtype = _DTYPES[tag]
    expected = h * w * c * dtype.itemsize
    if len(data) - 24 != expected:
        raise SceneFormatError("dimension-mismatch", path,
                               f"payload {len(data) - 24} bytes, header implies {expected}")
    arr = np.frombuffer(data, dtype=dtype, offset=24).reshape(h, w, c)
    return arr[:, :, 0] if c == 1 else arr


def _camera_to_json(intr: Intrinsics, pose: Pose) -> dict:
    return {
        "intrinsics": {"fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy,
                       "width": intr.width, "height": intr.height},
        "rotation": pose.rotation.tolist(),
        "translation": pose.translation.tolist(),
    }


def _camera_from_json(obj: dict, path) -> tuple[Intrinsics, Pose]:
    try:
        it = obj["intrinsics"]
        intr = Intrinsics(fx=float(it["fx"]), fy=float(it["fy"]),
                          cx=float(it["cx"]), cy=float(it["cy"]),
                          width=int(it["width"]), height=int(it["height"]))
        pose = Pose(np.array(obj["rotation"], dtype=np.float64),
                    np.array(obj["translation"], dtype=np.float64))
    except (KeyError, TypeError, ValueError) as e:
        raise SceneFormatError("bad-json", path, str(e)) from e
    return intr, pose


def write_scene(path, views, *, mu: float, delta: float) -> None:
    """Write views plus field parameters as a scene directory."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    names = []
    for i, view in enumerate(views):
        name = f"view_{i:03d}"
        names.append(name)
        vd = root / name
        vd.mkdir(exist_ok=True)
        (vd / "camera.json").write_text(
            json.dumps(_camera_to_json(view.intr, view.pose), indent=1))
        write_map(vd / "depth.f32", view.depth.astype("<f4"))
        write_map(vd / "feat.f32", view.features)
        write_map(vd / "mask.u8", view.mask_ids)
    meta = {"k": len(views), "n": views[0].feature_dim,
            "m": views[0].instance_count, "mu": mu, "delta": delta,
            "views": names}
    (root / "scene.json").write_text(json.dumps(meta, indent=1))


def read_scene(path):
    """Load and validate a scene directory.

    Returns (views, SceneParams); mask id maps are range-checked against the
    declared instance count (one-hot expansion stays lazy on CameraView).
    """
    root = Path(path)
    scene_path = root / "scene.json"
    try:
        meta = json.loads(scene_path.read_text())
    except OSError as e:
        raise SceneFormatError("missing-file", scene_path, str(e)) from e
    except json.JSONDecodeError as e:
        raise SceneFormatError("bad-json", scene_path, str(e)) from e
    try:
        k = int(meta["k"])
        n = int(meta["n"])
        m = int(meta["m"])
        mu = float(meta["mu"])
        delta = float(meta["delta"])
        names = list(meta["views"])
    except (KeyError, TypeError, ValueError) as e:
        raise SceneFormatError("bad-json", scene_path, str(e)) from e
    if len(names) != k:
        raise SceneFormatError("dimension-mismatch", scene_path,
                               f"k={k} but {len(names)} views listed")

    views = []
    for name in names:
        vd = root / name
        cam_path = vd / "camera.json"
        try:
            cam_obj = json.loads(cam_path.read_text())
        except OSError as e:
            raise SceneFormatError("missing-file", cam_path, str(e)) from e
        except json.JSONDecodeError as e:
            raise SceneFormatError("bad-json", cam_path, str(e)) from e
        intr, pose = _camera_from_json(cam_obj, cam_path)

        depth = read_map(vd / "depth.f32").astype(np.float64)
        feats = read_map(vd / "feat.f32")
        if feats.ndim == 2:
            feats = feats[:, :, None]
        ids = read_map(vd / "mask.u8")
        if feats.shape[2] != n:
            raise SceneFormatError("dimension-mismatch", vd / "feat.f32",
                                   f"feature dim {feats.shape[2]}, scene declares {n}")
        if ids.dtype != np.uint8:
            raise SceneFormatError("bad-dtype", vd / "mask.u8", "expected u8 ids")
        if int(ids.max(initial=0)) >= m:
            raise SceneFormatError("instance-id-range", vd / "mask.u8",
                                   f"id {int(ids.max())} >= m={m}")
        try:
            views.append(CameraView(intr, pose, depth, feats,
                                    mask_ids=ids, instance_count=m))
        except ValueError as e:
            raise SceneFormatError("dimension-mismatch", vd, str(e)) from e
    return views, SceneParams(mu=mu, delta=delta, k=k, n=n, m=m)
