"""Writer for the fieldfusion scene-directory format.

Implemented against FORMATS.md in the primary repository so this package
stays decoupled: the only contract between the two is the bytes on disk.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"D3FM"
VERSION = 1
DTYPE_F32 = 0
DTYPE_U8 = 1


def write_map(path, array: np.ndarray) -> None:
    arr = np.asarray(array)
    if arr.ndim == 2:
        arr = arr[:, :, None]
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


def write_scene(path, views, *, mu: float, delta: float) -> None:
    """views: list of dicts with keys intrinsics (dict), rotation (3x3),
    translation (3,), depth (HxW), features (HxWxN), mask_ids (HxW u8)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    names = []
    n = None
    m = 1
    for i, view in enumerate(views):
        name = f"view_{i:03d}"
        names.append(name)
        vd = root / name
        vd.mkdir(exist_ok=True)
        cam = {"intrinsics": view["intrinsics"],
               "rotation": np.asarray(view["rotation"]).tolist(),
               "translation": np.asarray(view["translation"]).tolist()}
        (vd / "camera.json").write_text(json.dumps(cam, indent=1))
        write_map(vd / "depth.f32", np.asarray(view["depth"], dtype="<f4"))
        feats = np.asarray(view["features"], dtype="<f4")
        write_map(vd / "feat.f32", feats)
        ids = np.asarray(view["mask_ids"], dtype=np.uint8)
        write_map(vd / "mask.u8", ids)
        n = feats.shape[2]
        m = max(m, int(ids.max()) + 1)
    meta = {"k": len(views), "n": n, "m": m, "mu": mu, "delta": delta,
            "views": names}
    (root / "scene.json").write_text(json.dumps(meta, indent=1))
