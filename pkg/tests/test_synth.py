import numpy as np
import pytest

import fieldfusion.synth as synth
from fieldfusion.geometry import Intrinsics, look_at_pose

INTR = Intrinsics(fx=400.0, fy=400.0, cx=159.5, cy=119.5, width=320, height=240)


def test_on_axis_sphere_depth():
    # camera staring at a sphere center from distance D: center pixel depth D - R
    c = np.array([0.0, 0.0, 0.0])
    scene = [synth.sphere(c, 0.05)]
    pose = look_at_pose([0.0, 0.0, 0.8], c, up=(0, 1, 0))
    spec = synth.ProceduralFeatureSpec(dim=4, seed=0)
    intr = Intrinsics(fx=400.0, fy=400.0, cx=160.0, cy=120.0, width=321, height=241)
    view = synth.render_views(scene, [(pose, intr)], spec)[0]
    assert view.depth[120, 160] == pytest.approx(0.75, abs=1e-9)


def test_rendered_depth_matches_analytic_intersection():
    rng = np.random.default_rng(0)
    scene = [synth.ground_plane(0.0, category=3, instance=1),
             synth.sphere([0.03, 0.01, 0.05], 0.05, category=1, instance=2),
             synth.box([-0.07, -0.02, 0.02], [0.04, 0.03, 0.02],
                       category=2, instance=3, yaw=0.4)]
    pose = look_at_pose([0.25, 0.2, 0.3], [0.0, 0.0, 0.0])
    spec = synth.ProceduralFeatureSpec(dim=4, seed=1)
    view = synth.render_views(scene, [(pose, INTR)], spec)[0]
    origin = pose.camera_center
    # spot-check random hit pixels: the 3D point implied by (pixel, depth)
    # must lie on the reported instance's surface
    hits = np.argwhere(view.depth > 0)
    for vi, ui in hits[rng.choice(len(hits), 200)]:
        z = view.depth[vi, ui]
        cam = np.array([(ui - INTR.cx) / INTR.fx * z, (vi - INTR.cy) / INTR.fy * z, z])
        world = pose.camera_to_world(cam)
        d, who = synth.analytic_sdf(scene, world)
        assert abs(d) < 1e-9
        assert who == view.mask_ids[vi, ui]


def test_occlusion_takes_nearest():
    # box in front of a sphere: occluded pixels carry the box depth and id
    scene = [synth.sphere([0.0, 0.0, 0.0], 0.05, category=1, instance=1),
             synth.box([0.0, 0.0, 0.15], [0.02, 0.02, 0.01], category=2, instance=2)]
    pose = look_at_pose([0.0, 0.0, 0.5], [0.0, 0.0, 0.0], up=(0, 1, 0))
    spec = synth.ProceduralFeatureSpec(dim=4, seed=2)
    view = synth.render_views(scene, [(pose, INTR)], spec)[0]
    ci, cj = 120, 160
    assert view.mask_ids[ci, cj] == 2
    assert view.depth[ci, cj] == pytest.approx(0.5 - 0.16, abs=1e-9)


def test_cross_instance_feature_equality():
    # two spheres of one category carry identical features at mirrored
    # object-local points (no noise)
    spec = synth.ProceduralFeatureSpec(dim=16, seed=3)
    a = synth.sphere([0.0, 0.0, 0.0], 0.05, category=7, instance=1)
    b = synth.sphere([0.2, 0.1, 0.0], 0.08, category=7, instance=2)
    q = np.array([[0.3, -0.5, 0.81]])
    fa = spec.features_for(a, np.array([0.0, 0.0, 0.0]) + q * 0.05)
    fb = spec.features_for(b, np.array([0.2, 0.1, 0.0]) + q * 0.08)
    np.testing.assert_allclose(fa, fb, atol=1e-12)


def test_mask_depth_consistency():
    scene = [synth.sphere([0.0, 0.0, 0.0], 0.05)]
    pose = look_at_pose([0.3, 0.2, 0.3], [0.0, 0.0, 0.0])
    spec = synth.ProceduralFeatureSpec(dim=4, seed=4)
    view = synth.render_views(scene, [(pose, INTR)], spec)[0]
    hit = view.depth > synth.DEPTH_NO_RETURN
    assert np.array_equal(hit, view.mask_ids != synth.BACKGROUND_ID)


def test_analytic_sdf_basics():
    c = np.array([0.1, -0.2, 0.3])
    scene = [synth.sphere(c, 0.05, instance=1)]
    d, who = synth.analytic_sdf(scene, c)
    assert d == pytest.approx(-0.05)
    d, _ = synth.analytic_sdf(scene, c + [0.05, 0.0, 0.0])
    assert d == pytest.approx(0.0, abs=1e-12)


def test_analytic_sdf_tie_breaks_low_instance():
    scene = [synth.sphere([-0.1, 0.0, 0.0], 0.05, instance=2),
             synth.sphere([0.1, 0.0, 0.0], 0.05, instance=5)]
    _, who = synth.analytic_sdf(scene, [0.0, 0.0, 0.0])
    assert who == 2


def test_box_sdf_rotation():
    prim = synth.box([0.0, 0.0, 0.0], [0.1, 0.05, 0.02], yaw=np.pi / 2)
    # after a 90 degree yaw the long axis lies along y
    d, _ = synth.analytic_sdf([prim], [0.0, 0.099, 0.0])
    assert d < 0
    d, _ = synth.analytic_sdf([prim], [0.099, 0.0, 0.0])
    assert d > 0


def test_unique_instance_ids_enforced():
    scene = [synth.sphere([0, 0, 0], 0.05, instance=1),
             synth.sphere([1, 0, 0], 0.05, instance=1)]
    spec = synth.ProceduralFeatureSpec(dim=4, seed=0)
    pose = look_at_pose([0, 0, 1.0], [0, 0, 0], up=(0, 1, 0))
    with pytest.raises(ValueError):
        synth.render_views(scene, [(pose, INTR)], spec)


def test_scene_dir_round_trip(tmp_path):
    from fieldfusion.sceneio import read_scene
    spec = synth.ProceduralFeatureSpec(dim=8, seed=5)
    scene = [synth.ground_plane(0.0, category=3, instance=1),
             synth.sphere([0.0, 0.0, 0.05], 0.05, category=1, instance=2)]
    cams = synth.corner_cameras((0, 0, 0), radius=0.25, height=0.3, intr=INTR)
    views = synth.render_views(scene, cams, spec)
    synth.write_scene_dir(views, tmp_path / "scene", mu=0.02, delta=1e-4)
    loaded, params = read_scene(tmp_path / "scene")
    assert params.k == 4 and params.n == 8 and params.m == 3
    assert params.mu == 0.02 and params.delta == 1e-4
    for a, b in zip(views, loaded):
        np.testing.assert_array_equal(a.depth.astype("<f4"), b.depth.astype("<f4"))
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.mask_ids, b.mask_ids)
        np.testing.assert_allclose(a.pose.rotation, b.pose.rotation)
