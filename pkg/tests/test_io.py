import json
import struct

import numpy as np
import pytest

import fieldfusion.synth as synth
from fieldfusion.geometry import Intrinsics
from fieldfusion.sceneio import (
    MAGIC,
    SceneFormatError,
    read_map,
    read_scene,
    write_map,
    write_scene,
)

INTR = Intrinsics(fx=100.0, fy=100.0, cx=31.5, cy=23.5, width=64, height=48)


def _views(seed=0, n=6, m=3):
    spec = synth.ProceduralFeatureSpec(dim=n, seed=seed)
    scene = [synth.sphere([0.0, 0.0, 0.05], 0.04, category=1, instance=1),
             synth.sphere([0.12, 0.0, 0.05], 0.04, category=1, instance=2)]
    cams = synth.corner_cameras((0.05, 0, 0), radius=0.2, height=0.3, intr=INTR)
    return synth.render_views(scene, cams, spec)


def test_map_round_trip_f32(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.normal(size=(5, 7, 3)).astype("<f4")
    path = tmp_path / "m.f32"
    write_map(path, arr)
    back = read_map(path)
    np.testing.assert_array_equal(back, arr)
    assert back.dtype == np.dtype("<f4")


def test_map_round_trip_u8(tmp_path):
    arr = (np.arange(35, dtype=np.uint8) % 4).reshape(5, 7)
    path = tmp_path / "m.u8"
    write_map(path, arr)
    np.testing.assert_array_equal(read_map(path), arr)


def test_map_header_layout(tmp_path):
    # byte-level: magic, version, H, W, C, dtype tag, little-endian payload
    arr = np.array([[1.0, 2.0], [3.0, 4.0]], dtype="<f4")
    path = tmp_path / "m.f32"
    write_map(path, arr)
    raw = path.read_bytes()
    assert raw[:4] == MAGIC == b"D3FM"
    version, h, w, c, tag = struct.unpack("<IIIII", raw[4:24])
    assert (version, h, w, c, tag) == (1, 2, 2, 1, 0)
    np.testing.assert_array_equal(np.frombuffer(raw[24:], dtype="<f4"),
                                  [1.0, 2.0, 3.0, 4.0])


def test_map_bad_magic(tmp_path):
    path = tmp_path / "bad"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(SceneFormatError) as exc:
        read_map(path)
    assert exc.value.code == "bad-magic"
    assert str(path) in str(exc.value)


def test_map_bad_version(tmp_path):
    path = tmp_path / "bad"
    path.write_bytes(MAGIC + struct.pack("<IIIII", 9, 1, 1, 1, 0) + b"\x00" * 4)
    with pytest.raises(SceneFormatError) as exc:
        read_map(path)
    assert exc.value.code == "bad-version"


def test_map_truncated_payload(tmp_path):
    path = tmp_path / "bad"
    path.write_bytes(MAGIC + struct.pack("<IIIII", 1, 4, 4, 2, 0) + b"\x00" * 10)
    with pytest.raises(SceneFormatError) as exc:
        read_map(path)
    assert exc.value.code == "dimension-mismatch"


def test_scene_round_trip(tmp_path):
    views = _views()
    write_scene(tmp_path / "s", views, mu=0.025, delta=2e-4)
    loaded, params = read_scene(tmp_path / "s")
    assert (params.k, params.n, params.m) == (4, 6, 3)
    assert params.mu == 0.025 and params.delta == 2e-4
    for a, b in zip(views, loaded):
        np.testing.assert_array_equal(a.depth.astype("<f4"),
                                      b.depth.astype("<f4"))
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.mask_ids, b.mask_ids)
        np.testing.assert_allclose(a.pose.rotation, b.pose.rotation, atol=1e-15)
        np.testing.assert_allclose(a.pose.translation, b.pose.translation, atol=1e-15)
        assert a.intr == b.intr


def test_scene_write_is_deterministic(tmp_path):
    views = _views()
    write_scene(tmp_path / "a", views, mu=0.02, delta=1e-4)
    write_scene(tmp_path / "b", views, mu=0.02, delta=1e-4)
    for rel in ["scene.json", "view_000/depth.f32", "view_000/feat.f32",
                "view_000/mask.u8", "view_000/camera.json"]:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_scene_instance_id_out_of_range(tmp_path):
    views = _views()
    write_scene(tmp_path / "s", views, mu=0.02, delta=1e-4)
    meta = json.loads((tmp_path / "s" / "scene.json").read_text())
    meta["m"] = 2  # ids reach 2, so m=2 makes them out of range
    (tmp_path / "s" / "scene.json").write_text(json.dumps(meta))
    with pytest.raises(SceneFormatError) as exc:
        read_scene(tmp_path / "s")
    assert exc.value.code == "instance-id-range"
    assert "mask.u8" in exc.value.path


def test_scene_feature_dim_mismatch(tmp_path):
    views = _views()
    write_scene(tmp_path / "s", views, mu=0.02, delta=1e-4)
    meta = json.loads((tmp_path / "s" / "scene.json").read_text())
    meta["n"] = 12
    (tmp_path / "s" / "scene.json").write_text(json.dumps(meta))
    with pytest.raises(SceneFormatError) as exc:
        read_scene(tmp_path / "s")
    assert exc.value.code == "dimension-mismatch"
    assert "feat.f32" in exc.value.path


def test_scene_missing_view_dir(tmp_path):
    views = _views()
    write_scene(tmp_path / "s", views, mu=0.02, delta=1e-4)
    meta = json.loads((tmp_path / "s" / "scene.json").read_text())
    meta["views"].append("view_099")
    meta["k"] = 5
    (tmp_path / "s" / "scene.json").write_text(json.dumps(meta))
    with pytest.raises(SceneFormatError) as exc:
        read_scene(tmp_path / "s")
    assert exc.value.code == "missing-file"


def test_scene_bad_json(tmp_path):
    (tmp_path / "s").mkdir()
    (tmp_path / "s" / "scene.json").write_text("{not json")
    with pytest.raises(SceneFormatError) as exc:
        read_scene(tmp_path / "s")
    assert exc.value.code == "bad-json"
