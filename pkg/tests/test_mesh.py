import numpy as np
import pytest

import fieldfusion.synth as synth
from fieldfusion import build_field
from fieldfusion.mesh import (
    DecoratedMesh,
    GridSpec,
    decorate,
    export_ply,
    extract_mesh,
    load_ply,
    mesh_edges,
    pca_colorize,
)
from fieldfusion.geometry import Intrinsics


def _sphere_grid(center, reach=0.085, cell=0.005):
    n = int(np.ceil(2 * reach / cell))
    return GridSpec(origin=np.asarray(center) - reach, cell=cell, dims=(n, n, n))


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(origin=np.zeros(3), cell=0.0, dims=(4, 4, 4))
    with pytest.raises(ValueError):
        GridSpec(origin=np.zeros(3), cell=0.01, dims=(1, 4, 4))


def test_iso_level_must_stay_in_band(sphere_scene):
    with pytest.raises(ValueError):
        extract_mesh(sphere_scene["field"], _sphere_grid(sphere_scene["center"]),
                     iso=0.05)


def test_sphere_mesh_accuracy_and_watertightness(sphere_scene):
    cell = 0.005
    mesh = extract_mesh(sphere_scene["field"], _sphere_grid(sphere_scene["center"], cell=cell))
    assert len(mesh.vertices) > 500
    r = np.linalg.norm(mesh.vertices.astype(np.float64) - sphere_scene["center"], axis=1)
    assert np.abs(r - sphere_scene["radius"]).max() <= np.sqrt(3) * cell
    counts = mesh_edges(mesh.triangles)
    assert set(counts.values()) == {2}


def test_sphere_mesh_outward_orientation(sphere_scene):
    mesh = extract_mesh(sphere_scene["field"], _sphere_grid(sphere_scene["center"]))
    tri = mesh.vertices[mesh.triangles].astype(np.float64)
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    outward = ((tri.mean(axis=1) - sphere_scene["center"]) * n).sum(axis=1)
    assert (outward > 0).all()


def test_plane_mesh_height(small_intr):
    # fronto-parallel ground plane: mesh z within one cell of the true height
    spec = synth.ProceduralFeatureSpec(dim=8, seed=2)
    height = 0.013
    scene = [synth.ground_plane(height, category=1, instance=1)]
    cams = synth.corner_cameras((0, 0, 0), radius=0.05, height=0.4,
                                intr=small_intr, top_down=True)
    field = build_field(synth.render_views(scene, cams, spec), mu=0.02, delta=1e-4)
    cell = 0.004
    grid = GridSpec(origin=[-0.05, -0.05, height - 0.012], cell=cell, dims=(25, 25, 6))
    mesh = extract_mesh(field, grid)
    assert not mesh.empty
    assert np.abs(mesh.vertices[:, 2] - height).max() <= cell


def test_unobserved_field_gives_empty_mesh(sphere_scene):
    grid = GridSpec(origin=[5.0, 5.0, 5.0], cell=0.01, dims=(4, 4, 4))
    mesh = extract_mesh(sphere_scene["field"], grid)
    assert mesh.empty


def test_decorate_two_spheres(small_intr):
    spec = synth.ProceduralFeatureSpec(dim=8, seed=3)
    ca, cb = np.array([-0.07, 0.0, 0.0]), np.array([0.07, 0.0, 0.0])
    scene = [synth.sphere(ca, 0.04, category=1, instance=1),
             synth.sphere(cb, 0.04, category=1, instance=2)]
    cams = synth.axis_cameras((0, 0, 0), 0.45, small_intr)
    field = build_field(synth.render_views(scene, cams, spec), mu=0.02, delta=1e-4)
    grid = GridSpec(origin=[-0.13, -0.06, -0.06], cell=0.005, dims=(52, 24, 24))
    mesh = decorate(extract_mesh(field, grid), field)
    assert not mesh.empty
    left = mesh.vertices[:, 0] < 0
    assert (mesh.labels[left] == 1).mean() > 0.99
    assert (mesh.labels[~left] == 2).mean() > 0.99
    # instance colors come from the palette and differ
    assert not np.array_equal(mesh.colors[left][0], mesh.colors[~left][0])


def test_decorate_single_instance(sphere_scene):
    mesh = decorate(extract_mesh(sphere_scene["field"],
                                 _sphere_grid(sphere_scene["center"])),
                    sphere_scene["field"])
    assert set(np.unique(mesh.labels)) == {1}


def test_decorate_empty_mesh(sphere_scene):
    empty = DecoratedMesh(np.zeros((0, 3), dtype=np.float32),
                          np.zeros((0, 3), dtype=np.int32))
    out = decorate(empty, sphere_scene["field"])
    assert out.empty and len(out.labels) == 0


def test_pca_identical_features_constant():
    colors = pca_colorize(np.ones((10, 5)))
    np.testing.assert_allclose(colors, 0.5)


def test_pca_axis_aligned_passthrough():
    # mean-zero, exactly orthogonal columns with distinct scales: principal
    # axes are the coordinate axes and each channel reproduces its input axis
    rng = np.random.default_rng(4)
    a = rng.normal(size=(200, 3))
    a -= a.mean(axis=0)
    q = np.empty_like(a)
    for k in range(3):
        v = a[:, k]
        for j in range(k):
            v = v - (v @ q[:, j]) * q[:, j]
        q[:, k] = v / np.linalg.norm(v)
    feats = q * [3.0, 2.0, 1.0]
    colors = pca_colorize(feats)
    # each channel reproduces the matching input axis up to sign
    for ch in range(3):
        x = feats[:, ch]
        ref = (x - x.min()) / (x.max() - x.min())
        match = min(np.abs(colors[:, ch] - ref).max(),
                    np.abs(colors[:, ch] - (1 - ref)).max())
        assert match < 1e-6


def test_pca_invariant_to_feature_rotation():
    rng = np.random.default_rng(5)
    feats = rng.normal(size=(100, 12)) * np.linspace(3, 0.1, 12)
    q, _ = np.linalg.qr(rng.normal(size=(12, 12)))
    a = pca_colorize(feats)
    b = pca_colorize(feats @ q.T)
    for ch in range(3):
        delta = min(np.abs(a[:, ch] - b[:, ch]).max(),
                    np.abs(a[:, ch] - (1 - b[:, ch])).max())
        assert delta < 1e-6


def test_pca_permutation_invariance():
    rng = np.random.default_rng(6)
    feats = rng.normal(size=(50, 8))
    perm = rng.permutation(50)
    a = pca_colorize(feats)
    b = pca_colorize(feats[perm])
    np.testing.assert_allclose(a[perm], b, atol=1e-9)


def test_pca_requires_three_vectors():
    with pytest.raises(ValueError):
        pca_colorize(np.ones((2, 4)))


def test_ply_round_trip(tmp_path, sphere_scene):
    mesh = decorate(extract_mesh(sphere_scene["field"],
                                 _sphere_grid(sphere_scene["center"])),
                    sphere_scene["field"])
    path = tmp_path / "sphere.ply"
    export_ply(mesh, path)
    back = load_ply(path)
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.triangles, mesh.triangles)
    quantized = np.clip(np.round(np.asarray(mesh.colors) * 255), 0, 255) / 255.0
    np.testing.assert_allclose(back.colors, quantized, atol=1e-12)


def test_ply_empty_mesh(tmp_path):
    empty = DecoratedMesh(np.zeros((0, 3), dtype=np.float32),
                          np.zeros((0, 3), dtype=np.int32))
    path = tmp_path / "empty.ply"
    export_ply(empty, path)
    back = load_ply(path)
    assert back.empty


def test_ply_header_grammar(tmp_path, sphere_scene):
    mesh = extract_mesh(sphere_scene["field"], _sphere_grid(sphere_scene["center"]))
    path = tmp_path / "g.ply"
    export_ply(mesh, path)
    raw = path.read_bytes()
    head, _, body = raw.partition(b"end_header\n")
    lines = head.decode("ascii").splitlines()
    assert lines[0] == "ply"
    assert lines[1] == "format binary_little_endian 1.0"
    assert f"element vertex {len(mesh.vertices)}" in lines
    assert f"element face {len(mesh.triangles)}" in lines
    props = [l for l in lines if l.startswith("property")]
    assert props[:3] == ["property float x", "property float y", "property float z"]
    assert "property list uchar int vertex_indices" in props
    assert len(body) == len(mesh.vertices) * 15 + len(mesh.triangles) * 13
