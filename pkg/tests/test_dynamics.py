import numpy as np
import pytest

from fieldfusion.dynamics import (
    PushAction,
    PusherDynamics,
    PusherParams,
    available_dynamics,
    get_dynamics,
    pusher_step,
    register_dynamics,
    start_overlaps,
)
from fieldfusion.tracking import KeypointSet


def _kps(points):
    pts = np.asarray(points, dtype=np.float64)
    return KeypointSet(points=pts, anchor_points=pts,
                       anchor_features=np.zeros((len(pts), 2)), instance=1)


def _action(start, direction, length):
    d = np.asarray(direction, dtype=np.float64)
    return PushAction(np.asarray(start, dtype=np.float64),
                      d / np.linalg.norm(d), length)


def test_push_action_validation():
    with pytest.raises(ValueError):
        PushAction(np.zeros(2), np.array([1.0, 1.0]), 0.05)
    with pytest.raises(ValueError):
        PushAction(np.zeros(2), np.array([1.0, 0.0]), -0.01)
    a = PushAction.from_params((0.1, 0.2, np.pi / 2, -0.5))
    assert a.length == 0.0
    np.testing.assert_allclose(a.direction, [0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(PushAction.from_params(a.params()).start, a.start)


def test_far_push_is_identity():
    kps = _kps([[0.5, 0.5, 0.0], [0.6, 0.4, 0.02]])
    out = pusher_step(kps, _action([0.0, 0.0], [1.0, 0.0], 0.05))
    np.testing.assert_array_equal(out.points, kps.points)


def test_zero_length_push_is_identity():
    kps = _kps([[0.005, 0.0, 0.0]])  # inside the disc radius
    out = pusher_step(kps, _action([0.0, 0.0], [1.0, 0.0], 0.0))
    np.testing.assert_array_equal(out.points, kps.points)


def test_point_on_line_pushed_to_disc_front():
    # push length >= separation: the point ends at `radius` from the center
    params = PusherParams(radius=0.01, band=0.0, rigid_group=False)
    kps = _kps([[0.03, 0.0, 0.0]])
    out = pusher_step(kps, _action([0.0, 0.0], [1.0, 0.0], 0.05), params)
    end = np.array([0.05, 0.0])
    dist = np.linalg.norm(out.points[0, :2] - end)
    assert dist == pytest.approx(0.01, abs=1e-12)
    assert out.points[0, 2] == 0.0


def test_granular_lateral_offset_preserved():
    params = PusherParams(radius=0.01, band=0.0, rigid_group=False)
    kps = _kps([[0.02, 0.004, 0.0], [0.03, -0.006, 0.01]])
    out = pusher_step(kps, _action([0.0, 0.0], [1.0, 0.0], 0.05), params)
    np.testing.assert_allclose(out.points[:, 1], [0.004, -0.006], atol=1e-12)
    # both displaced to the front arc of the final disc
    end = np.array([0.05, 0.0])
    d = np.linalg.norm(out.points[:, :2] - end, axis=1)
    np.testing.assert_allclose(d, 0.01, atol=1e-12)
    assert (out.points[:, 0] > end[0]).all()


def test_rigid_group_single_translation():
    params = PusherParams(radius=0.01, band=0.0, rigid_group=True)
    pts = [[0.02, 0.0, 0.0], [0.02, 0.1, 0.0], [-0.05, -0.2, 0.05]]
    kps = _kps(pts)
    out = pusher_step(kps, _action([0.0, 0.0], [1.0, 0.0], 0.05), params)
    deltas = out.points - np.asarray(pts)
    np.testing.assert_allclose(deltas, np.tile(deltas[0], (3, 1)), atol=1e-12)
    assert deltas[0][1] == 0.0 and deltas[0][2] == 0.0
    # contacted point clears the final disc exactly
    end = np.array([0.05, 0.0])
    assert np.linalg.norm(out.points[0, :2] - end) == pytest.approx(0.01, abs=1e-12)


def test_point_count_preserved():
    rng = np.random.default_rng(0)
    kps = _kps(rng.uniform(-0.05, 0.05, size=(17, 3)))
    out = pusher_step(kps, _action([-0.1, 0.0], [1.0, 0.0], 0.2),
                      PusherParams(rigid_group=False))
    assert len(out) == 17


def test_locality():
    params = PusherParams(radius=0.01, band=0.005, rigid_group=False)
    rng = np.random.default_rng(1)
    far = rng.uniform(0.1, 0.5, size=(10, 3)) * [1, 1, 0.1] + [0, 0.05, 0]
    kps = _kps(far)
    out = pusher_step(kps, _action([0.0, 0.0], [1.0, 0.0], 0.05), params)
    assert np.array_equal(out.points, kps.points)


def test_translation_equivariance():
    params = PusherParams(radius=0.01, rigid_group=False)
    rng = np.random.default_rng(2)
    pts = rng.uniform(-0.03, 0.08, size=(12, 3))
    shift = np.array([0.37, -0.21])
    a = _action([0.0, 0.0], [0.8, 0.6], 0.06)
    b = _action(shift, [0.8, 0.6], 0.06)
    out_a = pusher_step(_kps(pts), a, params)
    shifted = pts + [shift[0], shift[1], 0.0]
    out_b = pusher_step(_kps(shifted), b, params)
    np.testing.assert_allclose(out_b.points - [shift[0], shift[1], 0.0],
                               out_a.points, atol=1e-12)


def test_start_overlap_detection():
    kps = _kps([[0.0, 0.0, 0.0], [0.02, 0.0, 0.0], [0.0, 0.02, 0.0],
                [0.02, 0.02, 0.0]])
    inside = _action([0.01, 0.01, ], [1.0, 0.0], 0.05)
    outside = _action([-0.05, 0.01], [1.0, 0.0], 0.05)
    assert start_overlaps(kps, inside, PusherParams(radius=0.005))
    assert not start_overlaps(kps, outside, PusherParams(radius=0.005))


def test_teleport_places_centroid_at_target():
    from fieldfusion.dynamics import TeleportAction, teleport_step
    rng = np.random.default_rng(3)
    pts = rng.uniform(-0.03, 0.03, size=(10, 3)) + [0.0, 0.0, 0.02]
    kps = _kps(pts)
    action = TeleportAction(np.array([0.2, -0.1]), yaw=np.pi / 2)
    out = teleport_step(kps, action)
    np.testing.assert_allclose(out.points[:, :2].mean(axis=0), [0.2, -0.1],
                               atol=1e-12)
    # heights and pairwise distances preserved (rigid motion)
    np.testing.assert_allclose(np.sort(out.points[:, 2]), np.sort(pts[:, 2]),
                               atol=1e-12)
    d0 = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
    d1 = np.linalg.norm(out.points[:, None] - out.points[None, :], axis=2)
    np.testing.assert_allclose(d0, d1, atol=1e-12)


def test_teleport_param_round_trip():
    from fieldfusion.dynamics import TeleportAction
    a = TeleportAction.from_params((0.1, -0.2, 0.7, 99.0))
    np.testing.assert_allclose(TeleportAction.from_params(a.params()).target,
                               a.target)


def test_registry_roundtrip_and_errors():
    assert "pusher-rigid" in available_dynamics()
    assert "pusher-granular" in available_dynamics()
    assert "teleport-rigid" in available_dynamics()
    dyn = get_dynamics("pusher-rigid")
    assert dyn.deterministic
    name = register_dynamics("test-dyn", PusherDynamics("test-dyn", PusherParams()))
    assert get_dynamics(name).name == "test-dyn"
    with pytest.raises(ValueError):
        register_dynamics("pusher-rigid", dyn)
    with pytest.raises(KeyError) as exc:
        get_dynamics("no-such-model")
    assert "pusher-rigid" in str(exc.value)
