import numpy as np
import pytest

import fieldfusion.synth as synth
from fieldfusion import (
    GoalSpec,
    build_field,
    feature_distance_map,
    goal_points,
    pair_instances,
    sample_keypoints,
    softmax_weights,
)
from fieldfusion.geometry import Intrinsics, look_at_pose, project_batch

GOAL_INTR = Intrinsics(fx=500.0, fy=500.0, cx=319.5, cy=239.5, width=640, height=480)


def brute_force_softmax(alpha, s):
    """Independent reference: plain exponentials, no stabilization."""
    import math
    flat = [math.exp(-s * a) for a in np.asarray(alpha, dtype=float).ravel()]
    total = sum(flat)
    return np.array([f / total for f in flat]).reshape(np.shape(alpha))


def test_feature_distance_zero_at_match():
    gf = np.zeros((4, 5, 3))
    gf[2, 3] = [1.0, 2.0, 2.0]
    alpha = feature_distance_map(gf, [1.0, 2.0, 2.0])
    assert alpha[2, 3] == 0.0
    assert alpha[0, 0] == pytest.approx(3.0)


def test_feature_distance_unit_norm_against_zero():
    rng = np.random.default_rng(0)
    gf = rng.normal(size=(6, 7, 4))
    gf /= np.linalg.norm(gf, axis=2, keepdims=True)
    alpha = feature_distance_map(gf, np.zeros(4))
    np.testing.assert_allclose(alpha, 1.0, atol=1e-12)


def test_feature_distance_hand_values():
    gf = np.array([[[0.0, 0.0], [1.0, 0.0]],
                   [[0.0, 1.0], [1.0, 1.0]]])
    alpha = feature_distance_map(gf, [1.0, 0.0])
    np.testing.assert_allclose(alpha, [[1.0, 0.0], [np.sqrt(2.0), 1.0]], atol=1e-12)


def test_feature_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        feature_distance_map(np.zeros((2, 2, 3)), np.zeros(4))


def test_softmax_uniform_at_zero_sharpness():
    rng = np.random.default_rng(1)
    alpha = rng.uniform(size=(5, 6))
    beta = softmax_weights(alpha, 0.0)
    np.testing.assert_allclose(beta, 1.0 / 30.0, atol=1e-12)


def test_softmax_concentrates_at_large_sharpness():
    alpha = np.array([[1.0, 0.3], [0.9, 1.4]])
    beta = softmax_weights(alpha, 1e6)
    assert beta[0, 1] == pytest.approx(1.0)


def test_softmax_matches_brute_force_oracle():
    alpha = np.array([[1.0, 0.0], [np.sqrt(2.0), 1.0]])
    for s in (0.5, 1.0, 7.0):
        beta = softmax_weights(alpha, s)
        np.testing.assert_allclose(beta, brute_force_softmax(alpha, s), atol=1e-12)
        assert beta.sum() == pytest.approx(1.0, abs=1e-6)


def test_softmax_shift_stability():
    # adding a constant to alpha leaves beta unchanged (max-shifted exponents)
    rng = np.random.default_rng(2)
    alpha = rng.uniform(size=(8, 8))
    np.testing.assert_allclose(softmax_weights(alpha, 3.0),
                               softmax_weights(alpha + 500.0, 3.0), atol=1e-12)


def test_softmax_monotone_sharpening_at_argmin():
    rng = np.random.default_rng(3)
    for _ in range(10):
        alpha = rng.uniform(size=(6, 6))
        idx = np.unravel_index(np.argmin(alpha), alpha.shape)
        last = 0.0
        for s in (0.0, 1.0, 5.0, 25.0, 125.0):
            beta = softmax_weights(alpha, s)
            assert beta[idx] >= last - 1e-12
            assert np.unravel_index(np.argmax(beta), beta.shape) == idx or s == 0.0
            last = beta[idx]


@pytest.fixture(scope="module")
def sphere_pair(small_intr):
    """Workspace sphere A plus a same-category goal sphere B."""
    spec = synth.ProceduralFeatureSpec(dim=32, seed=21)
    cA, rA = np.array([0.0, 0.0, 0.05]), 0.05
    cB, rB = np.array([0.01, -0.01, 0.06]), 0.06
    sceneA = [synth.ground_plane(0.0, category=9, instance=1),
              synth.sphere(cA, rA, category=7, instance=2)]
    sceneB = [synth.ground_plane(0.0, category=9, instance=1),
              synth.sphere(cB, rB, category=7, instance=2)]
    cams = synth.corner_cameras((0, 0, 0), radius=0.28, height=0.33, intr=small_intr)
    field = build_field(synth.render_views(sceneA, cams, spec), mu=0.02, delta=1e-4)

    def cap_grid(center, radius, cell=0.001, min_nz=0.25):
        lo, hi = center - radius * 1.1, center + radius * 1.1
        axes = [np.arange(lo[k], hi[k] + cell, cell) for k in range(3)]
        g = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        return g[(g[:, 2] - center[2]) / radius > min_nz]

    kps = sample_keypoints(field, instance=2, n_s=30, tau_surf=0.0015,
                           grid_points=cap_grid(cA, rA))
    gpose = look_at_pose(np.array([0.05, 0.05, 0.45]), cB)
    gviews = synth.render_views(sceneB, [(gpose, GOAL_INTR)], spec)
    goal = GoalSpec(goal_features=gviews[0].features, reference_pose=gpose,
                    reference_intr=GOAL_INTR, goal_mask_ids=gviews[0].mask_ids)
    return {"field": field, "kps": kps, "goal": goal, "gpose": gpose,
            "cA": cA, "rA": rA, "cB": cB, "rB": rB, "spec": spec,
            "sceneA": sceneA, "cams": cams}


def test_goal_points_cross_instance(sphere_pair):
    gpts = goal_points(sphere_pair["field"], sphere_pair["kps"], sphere_pair["goal"],
                       pairing={2: 2})
    q = (sphere_pair["kps"].points - sphere_pair["cA"]) / sphere_pair["rA"]
    corr = sphere_pair["cB"] + q * sphere_pair["rB"]
    uv, _, _, _ = project_batch(corr, sphere_pair["gpose"], GOAL_INTR)
    err = np.linalg.norm(gpts.points_2d - uv, axis=1)
    assert np.median(err) <= 2.0


def test_goal_points_self_correspondence(sphere_pair):
    # goal rendered from the same scene: goal points land on the projections
    gpose = look_at_pose(np.array([0.0, 0.0, 0.5]), sphere_pair["cA"], up=(0, 1, 0))
    gviews = synth.render_views(sphere_pair["sceneA"], [(gpose, GOAL_INTR)],
                                sphere_pair["spec"])
    goal = GoalSpec(goal_features=gviews[0].features, reference_pose=gpose,
                    reference_intr=GOAL_INTR, goal_mask_ids=gviews[0].mask_ids)
    gpts = goal_points(sphere_pair["field"], sphere_pair["kps"], goal, pairing={2: 2})
    uv, _, _, _ = project_batch(sphere_pair["kps"].points, gpose, GOAL_INTR)
    err = np.linalg.norm(gpts.points_2d - uv, axis=1)
    assert np.median(err) <= 2.0


def test_goal_points_distribution_properties(sphere_pair):
    gpts = goal_points(sphere_pair["field"], sphere_pair["kps"], sphere_pair["goal"],
                       pairing={2: 2}, return_heatmaps=True)
    n, h, w = gpts.heatmaps.shape
    sums = gpts.heatmaps.reshape(n, -1).sum(axis=1)
    np.testing.assert_allclose(sums, 1.0, atol=1e-6)
    assert np.all(gpts.heatmaps >= 0.0)
    # convex combinations of pixel coordinates stay inside the image
    assert np.all(gpts.points_2d[:, 0] >= 0) and np.all(gpts.points_2d[:, 0] <= w - 1)
    assert np.all(gpts.points_2d[:, 1] >= 0) and np.all(gpts.points_2d[:, 1] <= h - 1)
    # masked softmax puts zero weight outside the paired instance
    outside = sphere_pair["goal"].goal_mask_ids != 2
    assert gpts.heatmaps[:, outside].max() == 0.0


def test_goal_points_uniform_weights_hit_mask_centroid(sphere_pair):
    goal = GoalSpec(goal_features=sphere_pair["goal"].goal_features,
                    reference_pose=sphere_pair["gpose"], reference_intr=GOAL_INTR,
                    sharpness=0.0, goal_mask_ids=sphere_pair["goal"].goal_mask_ids)
    gpts = goal_points(sphere_pair["field"], sphere_pair["kps"], goal, pairing={2: 2})
    vs, us = np.nonzero(goal.goal_mask_ids == 2)
    centroid = np.array([us.mean(), vs.mean()])
    np.testing.assert_allclose(gpts.points_2d,
                               np.tile(centroid, (len(gpts.points_2d), 1)), atol=1e-6)


def test_goal_points_uniform_unmasked_hits_image_centroid(sphere_pair):
    goal = GoalSpec(goal_features=sphere_pair["goal"].goal_features,
                    reference_pose=sphere_pair["gpose"], reference_intr=GOAL_INTR,
                    sharpness=0.0)
    gpts = goal_points(sphere_pair["field"], sphere_pair["kps"], goal)
    np.testing.assert_allclose(gpts.points_2d,
                               [[(640 - 1) / 2, (480 - 1) / 2]] * len(gpts.points_2d),
                               atol=1e-6)


def test_goal_points_rejects_empty_paired_instance(sphere_pair):
    with pytest.raises(ValueError):
        goal_points(sphere_pair["field"], sphere_pair["kps"], sphere_pair["goal"],
                    pairing={2: 5})


def test_pair_instances_single(sphere_pair):
    pairing = pair_instances(sphere_pair["field"], [sphere_pair["kps"]],
                             sphere_pair["goal"])
    assert pairing == {2: 2}


def test_pair_instances_two_categories(small_intr):
    # two distinct procedural families pair category-consistently
    spec = synth.ProceduralFeatureSpec(dim=32, seed=31)
    ws = [synth.ground_plane(0.0, category=9, instance=1),
          synth.sphere([-0.08, 0.0, 0.04], 0.04, category=1, instance=2),
          synth.sphere([0.08, 0.0, 0.03], 0.03, category=2, instance=3)]
    cams = synth.corner_cameras((0, 0, 0), radius=0.3, height=0.35, intr=small_intr)
    field = build_field(synth.render_views(ws, cams, spec), mu=0.02, delta=1e-4)
    kA = sample_keypoints(field, instance=2, n_s=20, tau_surf=0.002)
    kB = sample_keypoints(field, instance=3, n_s=20, tau_surf=0.002)

    goal_scene = [synth.ground_plane(0.0, category=9, instance=1),
                  synth.sphere([0.06, 0.05, 0.05], 0.05, category=1, instance=2),
                  synth.sphere([-0.06, -0.05, 0.035], 0.035, category=2, instance=3)]
    gpose = look_at_pose(np.array([0.0, 0.0, 0.5]), np.zeros(3), up=(0, 1, 0))
    gview = synth.render_views(goal_scene, [(gpose, GOAL_INTR)], spec)[0]
    goal = GoalSpec(goal_features=gview.features, reference_pose=gpose,
                    reference_intr=GOAL_INTR, goal_mask_ids=gview.mask_ids)
    pairing = pair_instances(field, [kA, kB], goal)
    # category-consistent: workspace instance 2 is category 1 like goal 2,
    # workspace 3 is category 2 like goal 3 (goal 1 is the background plane)
    assert pairing == {2: 2, 3: 3}


def test_pair_instances_duplicate_tie_break(sphere_pair):
    # identical duplicate instances pair deterministically by id order
    ids = sphere_pair["goal"].goal_mask_ids
    h, w = ids.shape
    dup = ids.copy()
    left = np.zeros_like(dup, dtype=bool)
    left[:, : w // 2] = True
    dup[(ids == 2) & ~left] = 3
    goal = GoalSpec(goal_features=sphere_pair["goal"].goal_features,
                    reference_pose=sphere_pair["gpose"], reference_intr=GOAL_INTR,
                    goal_mask_ids=dup)
    pairing = pair_instances(sphere_pair["field"], [sphere_pair["kps"]], goal)
    assert pairing[2] in (2, 3)
    again = pair_instances(sphere_pair["field"], [sphere_pair["kps"]], goal)
    assert pairing == again
