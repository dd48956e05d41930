"""Isosurface extraction from the fused signed distance, vertex decoration,
PCA coloring, and binary PLY export.

Marching cubes uses the classic 256-case table (see _mc_tables) with linear
edge interpolation. Cells touching any unobserved grid corner are skipped:
the fused distance only carries meaning inside the truncation band, so
extrapolating a sign there would fabricate surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._mc_tables import EDGE_CORNERS, TRI_TABLE
from .field import FusedField, evaluate_batch

# categorical palette for instance labels (background excluded)
MASK_PALETTE = np.array([
    [0.894, 0.102, 0.110], [0.216, 0.494, 0.722], [0.302, 0.686, 0.290],
    [0.596, 0.306, 0.639], [1.000, 0.498, 0.000], [1.000, 1.000, 0.200],
    [0.651, 0.337, 0.157], [0.969, 0.506, 0.749], [0.600, 0.600, 0.600],
    [0.090, 0.745, 0.812], [0.737, 0.741, 0.133], [0.122, 0.471, 0.706],
])
BACKGROUND_COLOR = np.array([0.5, 0.5, 0.5])

_CORNER_OFFSETS = np.array([[(c >> 0) & 1, (c >> 1) & 1, (c >> 2) & 1]
                            for c in range(8)], dtype=np.int64)


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned sampling lattice: `dims` counts cells, not points."""

    origin: np.ndarray
    cell: float
    dims: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64).reshape(3))
        if self.cell <= 0:
            raise ValueError("cell size must be positive")
        if any(d < 2 for d in self.dims):
            raise ValueError("need at least 2 cells per axis")

    def point_counts(self):
        return tuple(d + 1 for d in self.dims)

    def points(self) -> np.ndarray:
        """All grid points, shape (prod(dims+1), 3), x fastest."""
        nx, ny, nz = self.point_counts()
        ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz),
                                 indexing="ij")
        idx = np.stack([ix, iy, iz], axis=-1).reshape(-1, 3)
        return self.origin + self.cell * idx.astype(np.float64)


@dataclass
class DecoratedMesh:
    """Triangle mesh in world coordinates with optional per-vertex extras."""

    vertices: np.ndarray                 # (V, 3) float32
    triangles: np.ndarray                # (T, 3) int32
    features: np.ndarray | None = None   # (V, N) float32
    labels: np.ndarray | None = None     # (V,) int32 instance argmax
    colors: np.ndarray | None = None     # (V, 3) float in [0, 1]

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float32).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        if self.triangles.size and (self.triangles.min() < 0
                                    or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle indices out of range")
        if self.vertices.size and not np.all(np.isfinite(self.vertices)):
            raise ValueError("mesh vertices must be finite")

    @property
    def empty(self) -> bool:
        return len(self.vertices) == 0


def extract_mesh(field: FusedField, grid: GridSpec, iso: float = 0.0) -> DecoratedMesh:
    """Marching-cubes triangulation of the level set d = iso.

    A field with no observed region produces an empty mesh. Triangles are
    wound so normals point toward increasing d (out of objects).
    """
    if not (-field.mu < iso < field.mu):
        raise ValueError("iso level must lie inside the truncation band")
    pts = grid.points()
    batch = evaluate_batch(field, pts, with_features=False)
    nx, ny, nz = grid.point_counts()
    d = batch.d.reshape(nx, ny, nz)
    observed = batch.observed.reshape(nx, ny, nz)

    inside = d < iso
    cx, cy, cz = grid.dims
    config = np.zeros((cx, cy, cz), dtype=np.uint16)
    all_obs = np.ones((cx, cy, cz), dtype=bool)
    for c in range(8):
        ox, oy, oz = _CORNER_OFFSETS[c]
        sl = (slice(ox, cx + ox), slice(oy, cy + oy), slice(oz, cz + oz))
        config |= inside[sl].astype(np.uint16) << c
        all_obs &= observed[sl]
    active = np.argwhere((config != 0) & (config != 255) & all_obs)

    verts: list = []
    tris: list = []
    edge_index: dict = {}
    for i, j, k in active:
        cell_cfg = int(config[i, j, k])
        entries = TRI_TABLE[cell_cfg]
        base = np.array([i, j, k], dtype=np.int64)
        tri_ids = []
        for e in entries:
            ca, cb = EDGE_CORNERS[e]
            axis = e >> 2  # edges grouped 4 per axis: x, y, z
            ga = base + _CORNER_OFFSETS[ca]
            key = (int(ga[0]), int(ga[1]), int(ga[2]), axis)
            vid = edge_index.get(key)
            if vid is None:
                da = d[ga[0], ga[1], ga[2]]
                gb = base + _CORNER_OFFSETS[cb]
                db = d[gb[0], gb[1], gb[2]]
                t = (iso - da) / (db - da)
                pos = grid.origin + grid.cell * ga.astype(np.float64)
                pos[axis] += grid.cell * t
                vid = len(verts)
                verts.append(pos)
                edge_index[key] = vid
            tri_ids.append(vid)
        for t0 in range(0, len(tri_ids), 3):
            tris.append(tri_ids[t0:t0 + 3])

    if not verts:
        return DecoratedMesh(np.zeros((0, 3), dtype=np.float32),
                             np.zeros((0, 3), dtype=np.int32))
    return DecoratedMesh(np.asarray(verts, dtype=np.float32),
                         np.asarray(tris, dtype=np.int32))


def decorate(mesh: DecoratedMesh, field: FusedField) -> DecoratedMesh:
    """Attach fused descriptors, instance labels, and palette colors per vertex.

    Unobserved vertices fall back to the background label with a zero
    descriptor.
    """
    if mesh.empty:
        return DecoratedMesh(mesh.vertices, mesh.triangles,
                             features=np.zeros((0, field.feature_dim), dtype=np.float32),
                             labels=np.zeros(0, dtype=np.int32),
                             colors=np.zeros((0, 3)))
    batch = evaluate_batch(field, mesh.vertices.astype(np.float64))
    labels = np.where(batch.observed, np.argmax(batch.p, axis=1), 0).astype(np.int32)
    feats = np.where(batch.observed[:, None], batch.f, 0.0).astype(np.float32)
    colors = np.empty((len(labels), 3))
    bg = labels == 0
    colors[bg] = BACKGROUND_COLOR
    colors[~bg] = MASK_PALETTE[(labels[~bg] - 1) % len(MASK_PALETTE)]
    return DecoratedMesh(mesh.vertices, mesh.triangles, features=feats,
                         labels=labels, colors=colors)


def pca_colorize(features) -> np.ndarray:
    """Map descriptors to RGB via their top-3 principal components.

    Each channel is min-max normalized to [0, 1]; rank-deficient directions
    collapse to constant 0.5 channels.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 3:
        raise ValueError("need at least 3 feature vectors")
    Xc = X - X.mean(axis=0)
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    out = np.full((X.shape[0], 3), 0.5)
    for ch in range(min(3, vt.shape[0])):
        if s[ch] < 1e-12 * max(s[0], 1e-300):
            continue
        v = vt[ch]
        # canonical sign (largest-magnitude loading positive) makes the
        # colors independent of input row order
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        proj = Xc @ v
        lo, hi = proj.min(), proj.max()
        if hi - lo < 1e-15:
            continue
        out[:, ch] = (proj - lo) / (hi - lo)
    return out


def mesh_edges(triangles: np.ndarray) -> dict:
    """Undirected edge -> incidence count (watertight meshes count 2 everywhere)."""
    counts: dict = {}
    for a, b, c in np.asarray(triangles, dtype=np.int64):
        for e in ((a, b), (b, c), (c, a)):
            key = (min(e), max(e))
            counts[key] = counts.get(key, 0) + 1
    return counts


def export_ply(mesh: DecoratedMesh, path) -> None:
    """Write binary little-endian PLY: per-vertex x, y, z, red, green, blue
    plus a triangle face list. Read-back via `load_ply` is bit-exact."""
    v = len(mesh.vertices)
    t = len(mesh.triangles)
    if mesh.colors is not None:
        rgb = np.clip(np.round(np.asarray(mesh.colors) * 255.0), 0, 255).astype(np.uint8)
    else:
        rgb = np.full((v, 3), 200, dtype=np.uint8)
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {v}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        f"element face {t}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    vert_dtype = np.dtype([("xyz", "<f4", 3), ("rgb", "u1", 3)])
    vrec = np.empty(v, dtype=vert_dtype)
    vrec["xyz"] = mesh.vertices
    vrec["rgb"] = rgb
    face_dtype = np.dtype([("n", "u1"), ("idx", "<i4", 3)])
    frec = np.empty(t, dtype=face_dtype)
    frec["n"] = 3
    frec["idx"] = mesh.triangles
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(vrec.tobytes())
        fh.write(frec.tobytes())


def load_ply(path) -> DecoratedMesh:
    """Read a PLY written by `export_ply` (validates the exact header layout)."""
    with open(path, "rb") as fh:
        data = fh.read()
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply\n") or end < 0:
        raise ValueError("not a PLY file")
    header = data[:end].decode("ascii").splitlines()
    if "format binary_little_endian 1.0" not in header[1]:
        raise ValueError("unsupported PLY format")
    v = t = 0
    for line in header:
        parts = line.split()
        if parts[:2] == ["element", "vertex"]:
            v = int(parts[2])
        elif parts[:2] == ["element", "face"]:
            t = int(parts[2])
    body = data[end + len(b"end_header\n"):]
    vert_dtype = np.dtype([("xyz", "<f4", 3), ("rgb", "u1", 3)])
    face_dtype = np.dtype([("n", "u1"), ("idx", "<i4", 3)])
    vrec = np.frombuffer(body[:v * vert_dtype.itemsize], dtype=vert_dtype)
    frec = np.frombuffer(body[v * vert_dtype.itemsize:], dtype=face_dtype)
    if len(vrec) != v or len(frec) != t or (t and not np.all(frec["n"] == 3)):
        raise ValueError("PLY payload size mismatch")
    return DecoratedMesh(vrec["xyz"].copy(), frec["idx"].copy(),
                         colors=vrec["rgb"].astype(np.float64) / 255.0)
