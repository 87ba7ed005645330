"""Mesh representation, file I/O, rigid transforms, convex hulls, and sweeps.

Conventions used throughout the package: units are millimeters, the world
frame is Z-up, gravity points along -Z, and the table is the plane z = 0.
All objects defined here are immutable after construction and safe to share
between threads; every function is pure.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull as _SciPyHull
from scipy.spatial import QhullError

from .errors import NonManifold, ParseError

# Surfaces closer than DELTA_C are "touching", not colliding.
DELTA_C = 0.1
# Vertices within this distance are welded when loading STL.
WELD_TOL = 1e-4
# Triangles with less area than this are rejected as degenerate.
MIN_TRI_AREA = 1e-9
# Convexity tolerance for hull containment checks.
EPS_HULL = 1e-7


def _as_points(points, dim=None):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"expected {dim}-D points, got shape {pts.shape}")
    return pts


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero-length vector cannot be normalized")
    return v / n


# ---------------------------------------------------------------------------
# Pose
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation (3x3, det +1) followed by translation (mm)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        if np.abs(r @ r.T - np.eye(3)).max() > 1e-9:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation determinant is not +1")
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_translation(t) -> "Pose":
        return Pose(np.eye(3), np.asarray(t, dtype=float))

    @staticmethod
    def from_axis_angle(axis, angle_rad, translation=(0.0, 0.0, 0.0)) -> "Pose":
        """Rodrigues rotation about `axis` by `angle_rad`, then translate."""
        a = _unit(axis)
        k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
        r = np.eye(3) + math.sin(angle_rad) * k + (1 - math.cos(angle_rad)) * (k @ k)
        return Pose(r, translation)

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def apply_vector(self, vectors) -> np.ndarray:
        return np.asarray(vectors, dtype=float) @ self.rotation.T

    def compose(self, other: "Pose") -> "Pose":
        """Return self applied after `other` (self ∘ other)."""
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -(rt @ self.translation))

    def translated(self, offset) -> "Pose":
        return Pose(self.rotation, self.translation + np.asarray(offset, dtype=float))


def rotation_between(a, b) -> np.ndarray:
    """Smallest rotation matrix taking unit vector `a` onto unit vector `b`."""
    a = _unit(a)
    b = _unit(b)
    c = float(np.dot(a, b))
    if c > 1.0 - 1e-12:
        return np.eye(3)
    if c < -1.0 + 1e-12:
        # 180 degrees: rotate about any axis perpendicular to a.
        axis = np.cross(a, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-9:
            axis = np.cross(a, [0.0, 1.0, 0.0])
        axis = _unit(axis)
        return Pose.from_axis_angle(axis, math.pi).rotation
    v = np.cross(a, b)
    k = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + k + k @ k * (1.0 / (1.0 + c))


# ---------------------------------------------------------------------------
# Mesh
# ---------------------------------------------------------------------------

class Mesh:
    """Closed, consistently wound triangle mesh with derived com and volume.

    Vertices are mm. The constructor validates manifoldness (every edge
    shared by exactly two triangles with opposite winding), rejects
    degenerate triangles, and normalizes a consistently inward-wound mesh
    by flipping all windings so the signed volume is positive.
    """

    __slots__ = ("vertices", "triangles", "com", "volume", "_bvh", "_tri_cache")

    def __init__(self, vertices, triangles, validate=True):
        v = np.array(vertices, dtype=float).reshape(-1, 3)
        t = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if validate:
            _check_topology(v, t)
        vol, com = _volume_com(v, t)
        if vol < 0.0:
            t = t[:, ::-1].copy()
            vol, com = -vol, com
        if validate and vol <= 0.0:
            raise NonManifold("mesh encloses no volume")
        v.flags.writeable = False
        t.flags.writeable = False
        self.vertices = v
        self.triangles = t
        self.volume = float(vol)
        self.com = com
        self.com.flags.writeable = False
        self._bvh = None
        self._tri_cache = None

    def __repr__(self):
        return (f"Mesh({len(self.vertices)} verts, {len(self.triangles)} tris, "
                f"volume={self.volume:.3f})")

    def tri_array(self) -> np.ndarray:
        """(n, 3, 3) array of triangle vertex coordinates (cached)."""
        if self._tri_cache is None:
            self._tri_cache = self.vertices[self.triangles]
            self._tri_cache.flags.writeable = False
        return self._tri_cache

    def face_normals(self) -> np.ndarray:
        tri = self.tri_array()
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        lens = np.linalg.norm(n, axis=1, keepdims=True)
        return n / lens

    def face_areas(self) -> np.ndarray:
        tri = self.tri_array()
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(n, axis=1)

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def _check_topology(vertices, triangles):
    n_verts = len(vertices)
    if len(triangles) == 0:
        raise NonManifold("mesh has no triangles")
    if triangles.min() < 0 or triangles.max() >= n_verts:
        raise NonManifold("triangle index out of range")
    tri = vertices[triangles]
    areas = 0.5 * np.linalg.norm(
        np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    if (areas <= MIN_TRI_AREA).any():
        bad = int(np.argmax(areas <= MIN_TRI_AREA))
        raise NonManifold(f"triangle {bad} is degenerate (area <= {MIN_TRI_AREA})")
    edges = {}
    for idx, (a, b, c) in enumerate(triangles):
        for e in ((a, b), (b, c), (c, a)):
            if e in edges:
                raise NonManifold(
                    f"edge {e} wound twice in the same direction "
                    f"(triangles {edges[e]} and {idx})")
            edges[e] = idx
    for (a, b) in edges:
        if (b, a) not in edges:
            raise NonManifold(f"edge ({a}, {b}) has no opposite-wound twin (open surface)")


def _volume_com(vertices, triangles):
    """Signed volume and centroid via the divergence theorem."""
    tri = vertices[triangles]
    d = np.linalg.det(tri)  # 6 * signed volume of tetra (origin, v0, v1, v2)
    vol = d.sum() / 6.0
    if abs(vol) < 1e-12:
        return 0.0, np.zeros(3)
    centroid = (tri.sum(axis=1) / 4.0 * d[:, None]).sum(axis=0) / 6.0 / vol
    return vol, centroid


def transform_mesh(m: Mesh, p: Pose) -> Mesh:
    """Map a mesh by a rigid transform. Volume is preserved exactly."""
    out = Mesh.__new__(Mesh)
    v = p.apply(m.vertices)
    v.flags.writeable = False
    out.vertices = v
    out.triangles = m.triangles
    out.volume = m.volume
    out.com = p.apply(m.com)
    out.com.flags.writeable = False
    out._bvh = None
    out._tri_cache = None
    return out


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def load_mesh(path, format=None) -> Mesh:
    """Load a mesh from OBJ (ASCII) or binary STL. Units are mm, Z-up.

    The format is inferred from the extension unless given explicitly as
    "obj" or "stl-binary". STL vertices are welded within 1e-4 mm to
    recover shared topology. Raises ParseError for malformed files and
    NonManifold for open or inconsistently wound surfaces.
    """
    path = Path(path)
    if format is None:
        suffix = path.suffix.lower()
        format = {"obj": "obj", ".obj": "obj", ".stl": "stl-binary"}.get(suffix)
        if format is None:
            raise ParseError(f"cannot infer mesh format from {path.name!r}")
    if format == "obj":
        verts, tris = _parse_obj(path)
    elif format == "stl-binary":
        verts, tris = _parse_stl_binary(path)
    else:
        raise ParseError(f"unsupported mesh format {format!r}")
    return Mesh(verts, tris)


def _parse_obj(path):
    verts = []
    tris = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "v":
            if len(fields) < 4:
                raise ParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
            try:
                verts.append([float(x) for x in fields[1:4]])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad vertex coordinate") from exc
        elif tag == "f":
            refs = fields[1:]
            if len(refs) != 3:
                raise ParseError(
                    f"{path}:{lineno}: only triangular faces supported "
                    f"(got {len(refs)} vertices)")
            idx = []
            for ref in refs:
                head = ref.split("/")[0]
                try:
                    i = int(head)
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: bad face index {ref!r}") from exc
                idx.append(i - 1 if i > 0 else len(verts) + i)
            tris.append(idx)
        # other record types (vn, vt, o, g, s, mtllib, usemtl) are ignored
    if not verts or not tris:
        raise ParseError(f"{path}: no geometry found")
    return np.array(verts, dtype=float), np.array(tris, dtype=np.int64)


def _parse_stl_binary(path):
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if len(blob) < 84:
        raise ParseError(f"{path}: too short for binary STL")
    (count,) = struct.unpack_from("<I", blob, 80)
    expected = 84 + 50 * count
    if len(blob) != expected:
        raise ParseError(
            f"{path}: size mismatch (header says {count} facets, "
            f"expected {expected} bytes, got {len(blob)})")
    raw = np.frombuffer(blob, dtype=np.uint8, offset=84)
    records = raw.reshape(count, 50)
    floats = records[:, :48].copy().view("<f4").reshape(count, 4, 3).astype(float)
    corners = floats[:, 1:4, :].reshape(-1, 3)  # drop the facet normal
    verts, tris = _weld_vertices(corners, WELD_TOL)
    return verts, tris.reshape(-1, 3)


def _weld_vertices(points, tol):
    """Merge points that quantize to the same `tol` grid cell."""
    keys = np.round(points / tol).astype(np.int64)
    seen = {}
    index = np.empty(len(points), dtype=np.int64)
    verts = []
    for i, key in enumerate(map(tuple, keys)):
        j = seen.get(key)
        if j is None:
            j = len(verts)
            seen[key] = j
            verts.append(points[i])
        index[i] = j
    return np.array(verts, dtype=float), index


def save_obj(path, meshes, names=None):
    """Write one or more meshes to a single ASCII OBJ file."""
    if isinstance(meshes, Mesh):
        meshes = [meshes]
    lines = []
    base = 1
    for k, m in enumerate(meshes):
        name = names[k] if names else f"solid_{k}"
        lines.append(f"o {name}")
        for v in m.vertices:
            lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
        for t in m.triangles:
            lines.append(f"f {t[0] + base} {t[1] + base} {t[2] + base}")
        base += len(m.vertices)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_stl(path, mesh: Mesh):
    """Write a mesh as little-endian binary STL."""
    tris = mesh.tri_array()
    normals = mesh.face_normals()
    header = b"asmplan binary stl".ljust(80, b"\0")
    out = bytearray(header)
    out += struct.pack("<I", len(tris))
    for n, t in zip(normals, tris):
        out += struct.pack("<3f", *n)
        for corner in t:
            out += struct.pack("<3f", *corner)
        out += struct.pack("<H", 0)
    Path(path).write_bytes(bytes(out))


# ---------------------------------------------------------------------------
# Convex hulls (2D / 3D, degenerate ranks are first-class)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Hull2D:
    """Convex hull of 2D points. rank 0: point, 1: segment, 2: polygon (CCW)."""

    vertices: np.ndarray       # (k, 2) boundary vertices, CCW for rank 2
    source_index: np.ndarray   # (k,) indices into the input point set
    rank: int

    def __post_init__(self):
        self.vertices.flags.writeable = False
        self.source_index.flags.writeable = False


@dataclass(frozen=True)
class Hull3D:
    """Convex hull of 3D points.

    rank 3: vertices plus triangular faces with outward normals.
    rank 2: planar polygon (ordered boundary, `plane_normal` set, no faces).
    rank 0/1: point / segment.
    """

    vertices: np.ndarray       # (k, 3)
    source_index: np.ndarray   # (k,)
    rank: int
    faces: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))
    face_normals: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    plane_normal: np.ndarray | None = None

    def __post_init__(self):
        for arr in (self.vertices, self.source_index, self.faces, self.face_normals):
            arr.flags.writeable = False


def _rank_basis(points, tol=1e-7):
    """Affine rank of a point set plus centered SVD basis."""
    center = points.mean(axis=0)
    q = points - center
    if len(points) == 1:
        return 0, center, np.zeros((0, points.shape[1]))
    u, s, vt = np.linalg.svd(q, full_matrices=False)
    rank = int((s > tol).sum())
    return rank, center, vt[:rank]


def _canonical_ring_start(pts):
    """Index of the max-x (then min-y) vertex, for stable ring order."""
    order = np.lexsort((pts[:, 1], -pts[:, 0]))
    return int(order[0])


def convex_hull(points, tol=1e-7):
    """Convex hull of 2D or 3D points; degenerate inputs degenerate gracefully.

    Returns Hull2D for 2D input and Hull3D for 3D input. Collinear or
    coplanar inputs produce rank-deficient hulls instead of errors; callers
    branch on `rank`.
    """
    pts = _as_points(points)
    dim = pts.shape[1]
    if dim not in (2, 3):
        raise ValueError("convex_hull expects 2D or 3D points")
    rank, center, basis = _rank_basis(pts, tol)

    if rank == 0:
        keep = np.array([0], dtype=np.int64)
        if dim == 2:
            return Hull2D(pts[keep].copy(), keep, 0)
        return Hull3D(pts[keep].copy(), keep, 0)

    if rank == 1:
        axis = basis[0]
        coord = (pts - center) @ axis
        lo, hi = int(np.argmin(coord)), int(np.argmax(coord))
        keep = np.array([lo, hi], dtype=np.int64)
        if dim == 2:
            return Hull2D(pts[keep].copy(), keep, 1)
        return Hull3D(pts[keep].copy(), keep, 1)

    if dim == 2:
        verts, src = _hull_2d_indices(pts)
        return Hull2D(verts, src, 2)

    if rank == 2:
        normal = _unit(np.cross(basis[0], basis[1]))
        flat = (pts - center) @ basis.T
        verts2, src = _hull_2d_indices(flat)
        return Hull3D(pts[src].copy(), src, 2, plane_normal=normal)

    hull = _SciPyHull(pts)
    src = hull.vertices.astype(np.int64)
    remap = {int(orig): k for k, orig in enumerate(src)}
    faces = []
    normals = []
    centroid = pts[src].mean(axis=0)
    for simplex, eq in zip(hull.simplices, hull.equations):
        n = eq[:3]
        tri = [remap[int(i)] for i in simplex]
        a, b, c = pts[simplex]
        wind = np.cross(b - a, c - a)
        if np.dot(wind, n) < 0:
            tri = tri[::-1]
        faces.append(tri)
        normals.append(n / np.linalg.norm(n))
    faces = np.array(faces, dtype=np.int64)
    normals = np.array(normals, dtype=float)
    # face normals must point away from the hull centroid
    offs = np.einsum("ij,ij->i", normals, pts[src][faces[:, 0]] - centroid)
    if (offs < -tol).any():
        raise RuntimeError("inconsistent hull face orientation")
    return Hull3D(pts[src].copy(), src, 3, faces=faces, face_normals=normals)


def _hull_2d_indices(pts):
    """CCW hull of full-rank 2D points, ring rotated to a canonical start."""
    try:
        hull = _SciPyHull(pts)
    except QhullError as exc:  # should be unreachable: rank was checked
        raise RuntimeError(f"unexpected qhull failure: {exc}") from exc
    src = hull.vertices.astype(np.int64)  # CCW order
    verts = pts[src]
    start = _canonical_ring_start(verts)
    roll = np.roll(np.arange(len(src)), -start)
    return verts[roll].copy(), src[roll]


def hull_signed_distance(hull, p) -> float:
    """Signed distance from `p` to the hull boundary (negative inside).

    For rank-deficient hulls the interior is empty, so the value is the
    (nonnegative) distance to the degenerate hull set.
    """
    p = np.asarray(p, dtype=float)
    if isinstance(hull, Hull2D):
        if hull.rank == 2:
            return _polygon_signed_distance(hull.vertices, p)
        return _dist_to_point_or_segment(hull.vertices, p)
    if hull.rank == 3:
        # signed plane distances to every face
        offsets = np.einsum("ij,ij->i", hull.face_normals,
                            p[None, :] - hull.vertices[hull.faces[:, 0]])
        worst = offsets.max()
        if worst <= 0.0:
            return float(worst)
        tri = hull.vertices[hull.faces]
        return float(np.sqrt(_point_tri_sqdist(p, tri).min()))
    if hull.rank == 2:
        n = hull.plane_normal
        q = p - n * np.dot(n, p - hull.vertices[0])
        basis = _plane_basis(n)
        flat = (hull.vertices - hull.vertices[0]) @ basis.T
        fq = (q - hull.vertices[0]) @ basis.T
        d2d = _polygon_signed_distance(flat, fq)
        off = abs(np.dot(n, p - hull.vertices[0]))
        if d2d <= 0.0:
            return float(off)
        return float(math.hypot(d2d, off))
    return _dist_to_point_or_segment(hull.vertices, p)


def _plane_basis(normal):
    n = _unit(normal)
    ref = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = _unit(np.cross(n, ref))
    v = np.cross(n, u)
    return np.vstack([u, v])


def _dist_to_point_or_segment(verts, p):
    if len(verts) == 1:
        return float(np.linalg.norm(p - verts[0]))
    a, b = verts[0], verts[1]
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.linalg.norm(a + t * ab - p))


def _polygon_signed_distance(ring, p):
    """Signed distance to a CCW polygon boundary, negative inside."""
    a = ring
    b = np.roll(ring, -1, axis=0)
    edge = b - a
    rel = p[None, :] - a
    t = np.clip(np.einsum("ij,ij->i", rel, edge) /
                np.einsum("ij,ij->i", edge, edge), 0.0, 1.0)
    closest = a + t[:, None] * edge
    dist = np.linalg.norm(closest - p[None, :], axis=1).min()
    cross = edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0]
    inside = (cross >= 0.0).all()  # CCW: inside iff left of every edge
    return float(-dist if inside else dist)


def point_vs_hull(hull, p, tol=EPS_HULL) -> str:
    """Classify `p` against a hull: "inside", "boundary", or "outside"."""
    d = hull_signed_distance(hull, p)
    if abs(d) <= tol:
        return "boundary"
    return "inside" if d < 0.0 else "outside"


def closest_point_on_hull(points, p, tol=1e-9):
    """Closest point of conv(points) to `p`, and its distance.

    Works for every affine rank, including a degenerate point or segment.
    """
    pts = _as_points(points, 3)
    p = np.asarray(p, dtype=float)
    rank, center, basis = _rank_basis(pts, tol=1e-9)
    if rank == 0:
        q = pts[0]
        return q.copy(), float(np.linalg.norm(p - q))
    if rank == 1:
        axis = basis[0]
        coord = (pts - center) @ axis
        a = center + coord.min() * axis
        b = center + coord.max() * axis
        ab = b - a
        t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        q = a + t * ab
        return q, float(np.linalg.norm(p - q))
    if rank == 2:
        normal = _unit(np.cross(basis[0], basis[1]))
        off = np.dot(normal, p - center)
        proj = p - off * normal
        plane = _plane_basis(normal)
        flat = (pts - center) @ plane.T
        fq = (proj - center) @ plane.T
        hull2, src = _hull_2d_indices(flat)
        d2d = _polygon_signed_distance(hull2, fq)
        if d2d <= 0.0:
            return proj, float(abs(off))
        a = hull2
        b = np.roll(hull2, -1, axis=0)
        edge = b - a
        rel = fq[None, :] - a
        t = np.clip(np.einsum("ij,ij->i", rel, edge) /
                    np.einsum("ij,ij->i", edge, edge), 0.0, 1.0)
        cand = a + t[:, None] * edge
        k = int(np.argmin(np.linalg.norm(cand - fq[None, :], axis=1)))
        q2 = cand[k]
        q = center + q2 @ plane
        return q, float(np.linalg.norm(p - q))
    hull = convex_hull(pts)
    if hull_signed_distance(hull, p) <= 0.0:
        return p.copy(), 0.0
    tri = hull.vertices[hull.faces]
    sq = _point_tri_sqdist(p, tri)
    k = int(np.argmin(sq))
    q = _closest_point_on_triangle(p, tri[k])
    return q, float(math.sqrt(sq[k]))


def _point_tri_sqdist(p, tris):
    """Squared distance from a single point to each triangle in (n,3,3)."""
    from .collision import point_triangle_sqdist
    return point_triangle_sqdist(np.broadcast_to(p, (len(tris), 3)), tris)


def _closest_point_on_triangle(p, tri):
    from .collision import closest_point_triangle
    return closest_point_triangle(p[None, :], tri[None, :, :])[0]


# ---------------------------------------------------------------------------
# Sweeps and polylines
# ---------------------------------------------------------------------------

def sweep_poses(goal: Pose, direction, offset: float, steps: int):
    """Poses along a straight-line approach to `goal` moving along `direction`.

    pose_k translates the goal by -direction * offset * (1 - k/steps) for
    k = 0..steps, so the list starts `offset` mm before the goal and ends
    exactly at the goal.
    """
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    if offset <= 0.0:
        raise ValueError("offset must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    out = []
    for k in range(steps + 1):
        back = offset * (1.0 - k / steps)
        out.append(goal.translated(-d * back) if k < steps else goal)
    return out


def nearest_on_polyline(loop, p):
    """Nearest point on a closed 3D polyline to `p`, with its distance.

    Ties are broken by the lowest segment index, which makes results
    deterministic on symmetric fixtures.
    """
    loop = _as_points(loop, 3)
    if len(loop) < 3:
        raise ValueError("closed polyline needs at least 3 vertices")
    p = np.asarray(p, dtype=float)
    a = loop
    b = np.roll(loop, -1, axis=0)
    edge = b - a
    rel = p[None, :] - a
    denom = np.einsum("ij,ij->i", edge, edge)
    t = np.clip(np.einsum("ij,ij->i", rel, edge) / denom, 0.0, 1.0)
    cand = a + t[:, None] * edge
    dist = np.linalg.norm(cand - p[None, :], axis=1)
    k = int(np.argmin(dist))  # np.argmin returns the first (lowest) index
    return cand[k].copy(), float(dist[k])


def icosphere_directions(subdivisions=3) -> np.ndarray:
    """Unit direction samples from a subdivided icosahedron (3 -> 642)."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for (a, b, c) in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(verts)
