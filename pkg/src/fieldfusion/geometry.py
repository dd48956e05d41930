"""Pinhole camera model, rigid transforms, and sub-pixel map sampling.

Conventions used throughout the package:
  - Poses are world-to-camera: ``x_cam = R @ x_world + t``.
  - Depth is the camera-frame z coordinate (standard depth-image storage),
    not the Euclidean ray length.
  - Pixel coordinates are (u, v) = (column, row); texel (u, v) is centered
    at continuous coordinate (u, v).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ORTHO_TOL = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < self.width):
            raise ValueError(f"cx={self.cx} outside [0, {self.width})")
        if not (0 <= self.cy < self.height):
            raise ValueError(f"cy={self.cy} outside [0, {self.height})")


@dataclass(frozen=True)
class Pose:
    """World-to-camera rigid transform: x_cam = rotation @ x_world + translation."""

    rotation: np.ndarray   # (3, 3) orthonormal, det +1
    translation: np.ndarray  # (3,), meters

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if np.max(np.abs(R.T @ R - np.eye(3))) > _ORTHO_TOL:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation must have det +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    def world_to_camera(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def camera_to_world(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        return (pts - self.translation) @ self.rotation

    @property
    def camera_center(self) -> np.ndarray:
        """Camera origin expressed in world coordinates."""
        return -self.rotation.T @ self.translation

    def compose(self, other: "Pose") -> "Pose":
        """Pose mapping world->camera as self applied after other (x -> self(other(x)))."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)


@dataclass(frozen=True)
class PixelCoord:
    """Continuous pixel coordinate, (u, v) = (column, row)."""

    u: float
    v: float

    def __post_init__(self):
        if not (np.isfinite(self.u) and np.isfinite(self.v)):
            raise ValueError("pixel coordinates must be finite")


@dataclass(frozen=True)
class Projection:
    """Result of projecting one world point into a camera."""

    pixel: PixelCoord
    depth: float          # camera-frame z, meters
    behind: bool          # camera-frame z <= 0; pixel/depth are meaningless
    in_bounds: bool       # pixel inside [0, W-1] x [0, H-1]


def look_at_pose(eye, target, up=(0.0, 0.0, 1.0)) -> Pose:
    """World-to-camera pose for a camera at `eye` looking toward `target`.

    Camera axes follow the usual computer-vision convention: +z forward,
    +x right, +y down.
    """
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    fwd = target - eye
    n = np.linalg.norm(fwd)
    if n < 1e-12:
        raise ValueError("eye and target coincide")
    fwd = fwd / n
    up = np.asarray(up, dtype=np.float64)
    right = np.cross(fwd, up)
    rn = np.linalg.norm(right)
    if rn < 1e-9:
        # forward parallel to up; pick an arbitrary perpendicular
        alt = np.array([1.0, 0.0, 0.0]) if abs(fwd[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        right = np.cross(fwd, alt)
        rn = np.linalg.norm(right)
    right = right / rn
    down = np.cross(fwd, right)
    R = np.stack([right, down, fwd])  # rows: camera x, y, z in world coords
    return Pose(R, -R @ eye)


def project(x, pose: Pose, intr: Intrinsics) -> Projection:
    """Perspective-project one finite world point.

    Returns a behind-camera marker when the camera-frame z is <= 0;
    out-of-frame pixels are flagged via ``in_bounds`` rather than raised.
    """
    x = np.asarray(x, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(x)):
        raise ValueError("point must be finite")
    cam = pose.rotation @ x + pose.translation
    z = cam[2]
    if z <= 0.0:
        return Projection(PixelCoord(0.0, 0.0), 0.0, behind=True, in_bounds=False)
    u = intr.fx * cam[0] / z + intr.cx
    v = intr.fy * cam[1] / z + intr.cy
    inb = (0.0 <= u <= intr.width - 1.0) and (0.0 <= v <= intr.height - 1.0)
    return Projection(PixelCoord(u, v), z, behind=False, in_bounds=inb)


def project_batch(xs: np.ndarray, pose: Pose, intr: Intrinsics):
    """Vectorized projection.

    Returns (uv (n,2), depth (n,), behind (n,), in_bounds (n,)). Pixel values
    for behind-camera points are set to 0 and flagged.
    """
    xs = np.asarray(xs, dtype=np.float64).reshape(-1, 3)
    cam = xs @ pose.rotation.T + pose.translation
    z = cam[:, 2]
    behind = z <= 0.0
    safe_z = np.where(behind, 1.0, z)
    u = intr.fx * cam[:, 0] / safe_z + intr.cx
    v = intr.fy * cam[:, 1] / safe_z + intr.cy
    u = np.where(behind, 0.0, u)
    v = np.where(behind, 0.0, v)
    in_bounds = (~behind & (u >= 0.0) & (u <= intr.width - 1.0)
                 & (v >= 0.0) & (v <= intr.height - 1.0))
    return np.stack([u, v], axis=1), np.where(behind, 0.0, z), behind, in_bounds


def back_project(pixel: PixelCoord, depth: float, pose: Pose, intr: Intrinsics) -> np.ndarray:
    """Inverse of `project` for depth > 0: pixel + z-depth -> world point."""
    if depth <= 0:
        raise ValueError("depth must be positive")
    cam = np.array([(pixel.u - intr.cx) / intr.fx * depth,
                    (pixel.v - intr.cy) / intr.fy * depth,
                    depth])
    return pose.camera_to_world(cam)


def _clamp_bilinear_coords(u, v, h, w):
    u = np.clip(u, 0.0, w - 1.0)
    v = np.clip(v, 0.0, h - 1.0)
    u0 = np.minimum(np.floor(u), w - 2.0) if w > 1 else np.zeros_like(u)
    v0 = np.minimum(np.floor(v), h - 2.0) if h > 1 else np.zeros_like(v)
    return u - u0, v - v0, u0.astype(np.intp), v0.astype(np.intp)


def bilinear_sample(map_: np.ndarray, pixel: PixelCoord) -> np.ndarray:
    """Bilinear interpolation of an H x W x C map at one pixel, clamped to the interior."""
    out = bilinear_sample_batch(map_, np.array([[pixel.u, pixel.v]]))
    return out[0]


def bilinear_sample_batch(map_: np.ndarray, uv: np.ndarray) -> np.ndarray:
    """Bilinear interpolation at (n, 2) pixel coordinates.

    Coordinates are clamped to [0, W-1] x [0, H-1]; the four surrounding
    texels are blended with the standard weights. Scalar maps (H, W) return
    shape (n,), vector maps (H, W, C) return (n, C).
    """
    arr = np.asarray(map_)
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[:, :, None]
    h, w, c = arr.shape
    if h < 2 or w < 2:
        raise ValueError("map must be at least 2x2")
    uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
    fu, fv, u0, v0 = _clamp_bilinear_coords(uv[:, 0], uv[:, 1], h, w)
    f00 = arr[v0, u0]
    f01 = arr[v0, u0 + 1]
    f10 = arr[v0 + 1, u0]
    f11 = arr[v0 + 1, u0 + 1]
    fu = fu[:, None]
    fv = fv[:, None]
    out = ((1 - fv) * ((1 - fu) * f00 + fu * f01)
           + fv * ((1 - fu) * f10 + fu * f11))
    return out[:, 0] if squeeze else out


def bilinear_gradient_batch(map_: np.ndarray, uv: np.ndarray):
    """Gradient of the bilinear interpolant with respect to (u, v).

    Returns (d/du, d/dv), each (n,) for scalar maps or (n, C) for vector
    maps. The interpolant is piecewise bilinear; within each cell the
    gradient is exact, and clamped coordinates get the interior cell's value.
    """
    arr = np.asarray(map_)
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[:, :, None]
    h, w, c = arr.shape
    uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
    fu, fv, u0, v0 = _clamp_bilinear_coords(uv[:, 0], uv[:, 1], h, w)
    f00 = arr[v0, u0]
    f01 = arr[v0, u0 + 1]
    f10 = arr[v0 + 1, u0]
    f11 = arr[v0 + 1, u0 + 1]
    fu = fu[:, None]
    fv = fv[:, None]
    du = (1 - fv) * (f01 - f00) + fv * (f11 - f10)
    dv = (1 - fu) * (f10 - f00) + fu * (f11 - f01)
    if squeeze:
        return du[:, 0], dv[:, 0]
    return du, dv


def nearest_sample(map_: np.ndarray, pixel: PixelCoord) -> np.ndarray:
    """Nearest-texel lookup, clamped to bounds. Preserves one-hot vectors."""
    return nearest_sample_batch(map_, np.array([[pixel.u, pixel.v]]))[0]


def nearest_sample_batch(map_: np.ndarray, uv: np.ndarray) -> np.ndarray:
    arr = np.asarray(map_)
    h, w = arr.shape[:2]
    uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
    # floor(x + 0.5) rounds halves up uniformly, unlike np.round
    ui = np.clip(np.floor(uv[:, 0] + 0.5), 0, w - 1).astype(np.intp)
    vi = np.clip(np.floor(uv[:, 1] + 0.5), 0, h - 1).astype(np.intp)
    return arr[vi, ui]


def projection_jacobian_batch(xs: np.ndarray, pose: Pose, intr: Intrinsics) -> np.ndarray:
    """d(u, v)/d(x_world) for each point, shape (n, 2, 3).

    Valid for camera-frame z > 0; rows for z <= 0 are zero.
    """
    xs = np.asarray(xs, dtype=np.float64).reshape(-1, 3)
    cam = xs @ pose.rotation.T + pose.translation
    z = cam[:, 2]
    ok = z > 0.0
    zi = np.where(ok, z, 1.0)
    n = xs.shape[0]
    # d(u,v)/d(cam): [[fx/z, 0, -fx*x/z^2], [0, fy/z, -fy*y/z^2]]
    J = np.zeros((n, 2, 3))
    J[:, 0, 0] = intr.fx / zi
    J[:, 0, 2] = -intr.fx * cam[:, 0] / zi**2
    J[:, 1, 1] = intr.fy / zi
    J[:, 1, 2] = -intr.fy * cam[:, 1] / zi**2
    J[~ok] = 0.0
    return J @ pose.rotation
