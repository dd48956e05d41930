"""Self-contained synthetic RGBD capture: colored spheres on a gray plane.

Kept independent of the primary package; the only shared contract is the
scene-directory byte format.
"""

import numpy as np
import pytest


def look_at(eye, target):
    eye = np.asarray(eye, dtype=np.float64)
    fwd = np.asarray(target, dtype=np.float64) - eye
    fwd /= np.linalg.norm(fwd)
    up = np.array([0.0, 0.0, 1.0])
    right = np.cross(fwd, up)
    if np.linalg.norm(right) < 1e-9:
        right = np.cross(fwd, np.array([0.0, 1.0, 0.0]))
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    R = np.stack([right, down, fwd])
    return R, -R @ eye


def render_rgbd(spheres, eye, target, intr, plane_z=0.0):
    """Analytic render: depth is camera z, color flat per sphere, gray plane."""
    h, w = intr["height"], intr["width"]
    us, vs = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    R, t = look_at(eye, target)
    dirs_cam = np.stack([(us - intr["cx"]) / intr["fx"],
                         (vs - intr["cy"]) / intr["fy"],
                         np.ones_like(us)], axis=-1).reshape(-1, 3)
    dirs = dirs_cam @ R
    origin = -R.T @ t
    depth = np.full(dirs.shape[0], np.inf)
    color = np.zeros((dirs.shape[0], 3))
    # plane z = plane_z
    dz = dirs[:, 2]
    tp = np.where(np.abs(dz) > 1e-12, (plane_z - origin[2]) / dz, np.inf)
    hit = tp > 1e-9
    depth[hit] = tp[hit]
    color[hit] = 0.55
    for center, radius, rgb in spheres:
        oc = origin - np.asarray(center)
        b = dirs @ oc
        a = (dirs ** 2).sum(axis=1)
        c = oc @ oc - radius ** 2
        disc = b * b - a * c
        ok = disc >= 0
        sq = np.sqrt(np.maximum(disc, 0.0))
        t0 = (-b - sq) / a
        ts = np.where(t0 > 1e-9, t0, np.inf)
        closer = ok & (ts < depth)
        depth[closer] = ts[closer]
        color[closer] = rgb
    depth = np.where(np.isfinite(depth), depth, 0.0).reshape(h, w)
    rgb_img = (np.clip(color.reshape(h, w, 3), 0, 1) * 255).astype(np.uint8)
    camera = {"intrinsics": intr, "rotation": R.tolist(), "translation": t.tolist()}
    return rgb_img, depth, camera


INTR = {"fx": 300.0, "fy": 300.0, "cx": 119.5, "cy": 89.5, "width": 240, "height": 180}
SPHERES = [
    (np.array([-0.06, 0.0, 0.05]), 0.05, np.array([0.9, 0.2, 0.1])),
    (np.array([0.07, 0.02, 0.04]), 0.04, np.array([0.1, 0.3, 0.9])),
]
EYES = [(0.3, 0.3, 0.35), (0.3, -0.3, 0.35), (-0.3, 0.3, 0.35), (-0.3, -0.3, 0.35)]


@pytest.fixture(scope="session")
def capture():
    """Four calibrated RGBD views of the two-sphere scene."""
    rgbs, depths, cameras = [], [], []
    for eye in EYES:
        rgb, depth, cam = render_rgbd(SPHERES, eye, (0.0, 0.0, 0.0), INTR)
        rgbs.append(rgb)
        depths.append(depth)
        cameras.append(cam)
    return {"rgbs": rgbs, "depths": depths, "cameras": cameras,
            "spheres": SPHERES, "intr": INTR}


@pytest.fixture(scope="session")
def moving_capture():
    """Three frames with the second sphere sliding along +x."""
    frames = []
    for step in range(3):
        spheres = [SPHERES[0],
                   (SPHERES[1][0] + np.array([0.02 * step, 0.0, 0.0]),
                    SPHERES[1][1], SPHERES[1][2])]
        rgbs, depths, cameras = [], [], []
        for eye in EYES:
            rgb, depth, cam = render_rgbd(spheres, eye, (0.0, 0.0, 0.0), INTR)
            rgbs.append(rgb)
            depths.append(depth)
            cameras.append(cam)
        frames.append((rgbs, depths, cameras))
    return frames
