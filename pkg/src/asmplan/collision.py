"""Triangle-mesh proximity and overlap queries with a per-mesh AABB tree.

Two distinct predicates are exposed:

- `meshes_intersect(a, b, clearance)`: surfaces come within `clearance`
  of each other (touching counts), or one mesh is nested in the other.
- `overlap_beyond(a, b, tol)`: the solids genuinely interpenetrate deeper
  than `tol`. Exact face-on-face contact, which is everywhere in a valid
  assembly, does NOT trigger this predicate. Used by swept-path checks
  and input validation.
"""

from __future__ import annotations

import numpy as np

from .geometry import Mesh

_LEAF_SIZE = 8
_PARITY_DIRS = np.array([
    [0.29387622, 0.55817792, 0.77594208],
    [-0.61233413, 0.33614222, 0.71549301],
    [0.17320911, -0.84312817, 0.50908764],
])
_PARITY_DIRS /= np.linalg.norm(_PARITY_DIRS, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Vectorized primitive kernels
# ---------------------------------------------------------------------------

def point_triangle_sqdist(p, tri):
    """Squared distance from p[i] to triangle tri[i]; shapes (n,3), (n,3,3)."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    v0 = c - a
    v1 = b - a
    v2 = p - a
    d00 = np.einsum("ij,ij->i", v0, v0)
    d01 = np.einsum("ij,ij->i", v0, v1)
    d11 = np.einsum("ij,ij->i", v1, v1)
    d20 = np.einsum("ij,ij->i", v2, v0)
    d21 = np.einsum("ij,ij->i", v2, v1)
    denom = d00 * d11 - d01 * d01
    denom = np.where(np.abs(denom) < 1e-30, 1e-30, denom)
    v = (d11 * d20 - d01 * d21) / denom
    w = (d00 * d21 - d01 * d20) / denom
    inside = (v >= 0.0) & (w >= 0.0) & (v + w <= 1.0)

    n = np.cross(v1, v0)
    nn = np.einsum("ij,ij->i", n, n)
    nn = np.where(nn < 1e-30, 1e-30, nn)
    plane_sq = np.einsum("ij,ij->i", v2, n) ** 2 / nn

    edge_sq = np.minimum(
        _point_segment_sqdist(p, a, b),
        np.minimum(_point_segment_sqdist(p, b, c),
                   _point_segment_sqdist(p, c, a)))
    return np.where(inside, plane_sq, edge_sq)


def closest_point_triangle(p, tri):
    """Closest point on triangle tri[i] to p[i]."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    v0 = c - a
    v1 = b - a
    v2 = p - a
    d00 = np.einsum("ij,ij->i", v0, v0)
    d01 = np.einsum("ij,ij->i", v0, v1)
    d11 = np.einsum("ij,ij->i", v1, v1)
    d20 = np.einsum("ij,ij->i", v2, v0)
    d21 = np.einsum("ij,ij->i", v2, v1)
    denom = d00 * d11 - d01 * d01
    denom = np.where(np.abs(denom) < 1e-30, 1e-30, denom)
    v = (d11 * d20 - d01 * d21) / denom
    w = (d00 * d21 - d01 * d20) / denom
    inside = ((v >= 0.0) & (w >= 0.0) & (v + w <= 1.0))[:, None]
    proj = a + v[:, None] * v0 + w[:, None] * v1

    cand_ab = _closest_point_segment(p, a, b)
    cand_bc = _closest_point_segment(p, b, c)
    cand_ca = _closest_point_segment(p, c, a)
    d_ab = np.einsum("ij,ij->i", p - cand_ab, p - cand_ab)
    d_bc = np.einsum("ij,ij->i", p - cand_bc, p - cand_bc)
    d_ca = np.einsum("ij,ij->i", p - cand_ca, p - cand_ca)
    edge_best = np.where((d_ab <= d_bc)[:, None] & (d_ab <= d_ca)[:, None], cand_ab,
                         np.where((d_bc <= d_ca)[:, None], cand_bc, cand_ca))
    return np.where(inside, proj, edge_best)


def _point_segment_sqdist(p, a, b):
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom = np.where(denom < 1e-30, 1e-30, denom)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
    q = a + t[:, None] * ab
    return np.einsum("ij,ij->i", p - q, p - q)


def _closest_point_segment(p, a, b):
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom = np.where(denom < 1e-30, 1e-30, denom)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
    return a + t[:, None] * ab


def segment_segment_sqdist(p1, q1, p2, q2):
    """Squared distance between segments [p1,q1] and [p2,q2], rowwise."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = np.einsum("ij,ij->i", d1, r)
    b = np.einsum("ij,ij->i", d1, d2)
    denom = a * e - b * b
    s = np.where(denom > 1e-30, np.clip((b * f - c * e) / np.where(denom > 1e-30, denom, 1.0), 0.0, 1.0), 0.0)
    e_safe = np.where(e > 1e-30, e, 1.0)
    t = (b * s + f) / e_safe
    t_low = t < 0.0
    t_high = t > 1.0
    a_safe = np.where(a > 1e-30, a, 1.0)
    s = np.where(t_low, np.clip(-c / a_safe, 0.0, 1.0), s)
    s = np.where(t_high, np.clip((b - c) / a_safe, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)
    diff = (p1 + s[:, None] * d1) - (p2 + t[:, None] * d2)
    return np.einsum("ij,ij->i", diff, diff)


def segments_cross_triangles(s0, s1, tri, eps=1e-12):
    """True where segment [s0[i], s1[i]] pierces triangle tri[i] transversally."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    d = s1 - s0
    e1 = b - a
    e2 = c - a
    h = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, h)
    ok = np.abs(det) > eps
    det_safe = np.where(ok, det, 1.0)
    s = s0 - a
    u = np.einsum("ij,ij->i", s, h) / det_safe
    q = np.cross(s, e1)
    v = np.einsum("ij,ij->i", d, q) / det_safe
    t = np.einsum("ij,ij->i", e2, q) / det_safe
    inc = 1e-9
    return (ok & (u >= -inc) & (v >= -inc) & (u + v <= 1.0 + inc)
            & (t >= -inc) & (t <= 1.0 + inc))


def tri_tri_distance(p, q):
    """Distance between triangle pairs p[i], q[i]; 0 when they intersect."""
    n = len(p)
    if n == 0:
        return np.zeros(0)
    best = np.full(n, np.inf)
    # vertex-vs-triangle, both directions
    for k in range(3):
        best = np.minimum(best, point_triangle_sqdist(p[:, k], q))
        best = np.minimum(best, point_triangle_sqdist(q[:, k], p))
    # edge-vs-edge, all nine combinations
    for i in range(3):
        pa, pb = p[:, i], p[:, (i + 1) % 3]
        for j in range(3):
            qa, qb = q[:, j], q[:, (j + 1) % 3]
            best = np.minimum(best, segment_segment_sqdist(pa, pb, qa, qb))
    dist = np.sqrt(best)
    # transversal crossings have positive vertex/edge distances; zero them
    cross = np.zeros(n, dtype=bool)
    for i in range(3):
        cross |= segments_cross_triangles(p[:, i], p[:, (i + 1) % 3], q)
        cross |= segments_cross_triangles(q[:, i], q[:, (i + 1) % 3], p)
    dist[cross] = 0.0
    return dist


# ---------------------------------------------------------------------------
# AABB tree
# ---------------------------------------------------------------------------

class AABBTree:
    """Static axis-aligned bounding box tree over a triangle array."""

    __slots__ = ("tris", "lo", "hi", "left", "right", "start", "count", "order")

    def __init__(self, tris):
        tris = np.asarray(tris, dtype=float)
        self.tris = tris
        n = len(tris)
        tri_lo = tris.min(axis=1)
        tri_hi = tris.max(axis=1)
        centers = 0.5 * (tri_lo + tri_hi)
        order = np.arange(n)
        lo, hi, left, right, start, count = [], [], [], [], [], []

        def build(idx):
            node = len(lo)
            lo.append(tri_lo[idx].min(axis=0))
            hi.append(tri_hi[idx].max(axis=0))
            left.append(-1)
            right.append(-1)
            start.append(-1)
            count.append(0)
            if len(idx) <= _LEAF_SIZE:
                start[node] = build.cursor
                count[node] = len(idx)
                order[build.cursor:build.cursor + len(idx)] = idx
                build.cursor += len(idx)
                return node
            axis = int(np.argmax(hi[node] - lo[node]))
            med = np.argsort(centers[idx, axis], kind="stable")
            half = len(idx) // 2
            left[node] = build(idx[med[:half]])
            right[node] = build(idx[med[half:]])
            return node

        build.cursor = 0
        build(np.arange(n))
        self.lo = np.array(lo)
        self.hi = np.array(hi)
        self.left = np.array(left)
        self.right = np.array(right)
        self.start = np.array(start)
        self.count = np.array(count)
        self.order = order

    def leaf_tris(self, node):
        s, c = self.start[node], self.count[node]
        return self.order[s:s + c]


def get_tree(mesh: Mesh) -> AABBTree:
    if mesh._bvh is None:
        mesh._bvh = AABBTree(mesh.tri_array())
    return mesh._bvh


def _box_distance(lo_a, hi_a, lo_b, hi_b):
    gap = np.maximum(lo_a - hi_b, lo_b - hi_a)
    gap = np.maximum(gap, 0.0)
    return float(np.linalg.norm(gap))


def candidate_pairs(tree_a: AABBTree, tree_b: AABBTree, clearance):
    """Triangle index pairs whose boxes come within `clearance`."""
    out = []
    stack = [(0, 0)]
    while stack:
        na, nb = stack.pop()
        if _box_distance(tree_a.lo[na], tree_a.hi[na],
                         tree_b.lo[nb], tree_b.hi[nb]) > clearance:
            continue
        leaf_a = tree_a.left[na] < 0
        leaf_b = tree_b.left[nb] < 0
        if leaf_a and leaf_b:
            ia = tree_a.leaf_tris(na)
            ib = tree_b.leaf_tris(nb)
            out.append((ia, ib))
        elif leaf_a or (not leaf_b and
                        (tree_b.hi[nb] - tree_b.lo[nb]).max()
                        > (tree_a.hi[na] - tree_a.lo[na]).max()):
            stack.append((na, tree_b.left[nb]))
            stack.append((na, tree_b.right[nb]))
        else:
            stack.append((tree_a.left[na], nb))
            stack.append((tree_a.right[na], nb))
    if not out:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    ia = np.concatenate([np.repeat(a, len(b)) for a, b in out])
    ib = np.concatenate([np.tile(b, len(a)) for a, b in out])
    return ia, ib


# ---------------------------------------------------------------------------
# Point-in-mesh (ray parity with degeneracy fallback)
# ---------------------------------------------------------------------------

def points_in_mesh(points, mesh: Mesh):
    """Boolean array: which points lie strictly inside the closed mesh."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    tris = mesh.tri_array()
    result = np.zeros(len(pts), dtype=bool)
    pending = np.arange(len(pts))
    for d in _PARITY_DIRS:
        if len(pending) == 0:
            break
        parity, risky = _ray_parity(pts[pending], d, tris)
        settled = ~risky
        result[pending[settled]] = parity[settled]
        pending = pending[risky]
    if len(pending):
        # all directions were grazing; accept the last parity estimate
        parity, _ = _ray_parity(pts[pending], _PARITY_DIRS[-1], tris)
        result[pending] = parity
    return result


def _ray_parity(pts, d, tris):
    a = tris[:, 0][None, :, :]
    e1 = (tris[:, 1] - tris[:, 0])[None, :, :]
    e2 = (tris[:, 2] - tris[:, 0])[None, :, :]
    h = np.cross(d[None, None, :], e2)
    det = np.einsum("pij,pij->pi", e1, h)
    ok = np.abs(det) > 1e-12
    det_safe = np.where(ok, det, 1.0)
    s = pts[:, None, :] - a
    u = np.einsum("pij,pij->pi", s, h) / det_safe
    q = np.cross(s, e1)
    v = np.einsum("j,pij->pi", d, q) / det_safe
    t = np.einsum("pij,pij->pi", e2, q) / det_safe
    hit = ok & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > 1e-9)
    count = hit.sum(axis=1)
    margin = 1e-7
    grazing = ok & (t > -margin) & (
        (np.abs(u) < margin) | (np.abs(v) < margin)
        | (np.abs(1.0 - u - v) < margin) | (np.abs(t) < margin))
    grazing &= (u > -margin) & (v > -margin) & (u + v < 1.0 + margin)
    risky = grazing.any(axis=1)
    return (count % 2).astype(bool), risky


# ---------------------------------------------------------------------------
# Mesh-level predicates
# ---------------------------------------------------------------------------

def meshes_intersect(a: Mesh, b: Mesh, clearance: float) -> bool:
    """True iff surfaces come within `clearance` or one mesh nests in the other.

    Accelerated with per-mesh AABB trees; identical in outcome to the
    all-pairs triangle test (`brute_force_intersect`).
    """
    if clearance < 0.0:
        raise ValueError("clearance must be >= 0")
    lo_a, hi_a = a.bounds()
    lo_b, hi_b = b.bounds()
    if _box_distance(lo_a, hi_a, lo_b, hi_b) > clearance:
        return False
    ia, ib = candidate_pairs(get_tree(a), get_tree(b), clearance)
    tris_a = a.tri_array()
    tris_b = b.tri_array()
    for chunk in range(0, len(ia), 4096):
        sl = slice(chunk, chunk + 4096)
        d = tri_tri_distance(tris_a[ia[sl]], tris_b[ib[sl]])
        if (d <= clearance).any():
            return True
    return _nested(a, b)


def brute_force_intersect(a: Mesh, b: Mesh, clearance: float) -> bool:
    """All-pairs reference for `meshes_intersect` (no tree, no box pruning)."""
    tris_a = a.tri_array()
    tris_b = b.tri_array()
    na, nb = len(tris_a), len(tris_b)
    ia = np.repeat(np.arange(na), nb)
    ib = np.tile(np.arange(nb), na)
    d = tri_tri_distance(tris_a[ia], tris_b[ib])
    if (d <= clearance).any():
        return True
    return _nested(a, b)


def _nested(a: Mesh, b: Mesh) -> bool:
    if points_in_mesh(a.vertices[:1], b)[0]:
        return True
    return bool(points_in_mesh(b.vertices[:1], a)[0])


def erode_triangles(tris, delta):
    """Erode triangles by `delta`: offset along -normal and shrink in-plane.

    The in-plane shrink scales about the incenter so every edge line
    recedes by exactly `delta`; triangles with inradius <= delta collapse
    to their incenter and stop participating in crossing tests.
    """
    tris = np.asarray(tris, dtype=float)
    n = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    norms = np.linalg.norm(n, axis=1, keepdims=True)
    moved = tris - delta * (n / norms)[:, None, :]
    a, b, c = moved[:, 0], moved[:, 1], moved[:, 2]
    la = np.linalg.norm(c - b, axis=1)
    lb = np.linalg.norm(a - c, axis=1)
    lc = np.linalg.norm(b - a, axis=1)
    peri = la + lb + lc
    incenter = (la[:, None] * a + lb[:, None] * b + lc[:, None] * c) / peri[:, None]
    inradius = norms[:, 0] / peri  # 2*area / perimeter
    factor = np.clip((inradius - delta) / np.where(inradius > 0, inradius, 1.0),
                     0.0, 1.0)
    return incenter[:, None, :] + (moved - incenter[:, None, :]) * factor[:, None, None]


def overlap_beyond(a: Mesh, b: Mesh, tol: float) -> bool:
    """True iff the two solids interpenetrate deeper than `tol`.

    Face-on-face contact and slides (separation in [-tol, tol]) do not
    count. Detection combines (1) eroded-surface crossing tests and
    (2) parity samples (vertices and face centroids) that lie inside the
    other solid at depth > tol.
    """
    lo_a, hi_a = a.bounds()
    lo_b, hi_b = b.bounds()
    if _box_distance(lo_a, hi_a, lo_b, hi_b) > 0.0:
        return False
    ia, ib = candidate_pairs(get_tree(a), get_tree(b), tol + 1e-9)
    if len(ia):
        tris_a = a.tri_array()[ia]
        tris_b = b.tri_array()[ib]
        if _soup_crossings(erode_triangles(tris_a, tol), tris_b):
            return True
        if _soup_crossings(erode_triangles(tris_b, tol), tris_a):
            return True
    lo = np.maximum(lo_a, lo_b) - tol
    hi = np.minimum(hi_a, hi_b) + tol
    if _deep_samples(a, b, tol, lo, hi):
        return True
    return _deep_samples(b, a, tol, lo, hi)


def _soup_crossings(soup, tris):
    for i in range(3):
        if segments_cross_triangles(soup[:, i], soup[:, (i + 1) % 3], tris).any():
            return True
        if segments_cross_triangles(tris[:, i], tris[:, (i + 1) % 3], soup).any():
            return True
    return False


def _deep_samples(a: Mesh, b: Mesh, tol, lo, hi):
    samples = np.vstack([a.vertices, a.tri_array().mean(axis=1)])
    keep = ((samples >= lo) & (samples <= hi)).all(axis=1)
    samples = samples[keep]
    if len(samples) == 0:
        return False
    inside = points_in_mesh(samples, b)
    if not inside.any():
        return False
    deep = samples[inside]
    tris_b = b.tri_array()
    for p in deep:
        sq = point_triangle_sqdist(np.broadcast_to(p, (len(tris_b), 3)), tris_b)
        if float(np.sqrt(sq.min())) > tol:
            return True
    return False


def penetration_depth_estimate(a: Mesh, b: Mesh) -> float:
    """Max depth of either mesh's parity samples inside the other (mm)."""
    depth = 0.0
    for m, other in ((a, b), (b, a)):
        samples = np.vstack([m.vertices, m.tri_array().mean(axis=1)])
        inside = points_in_mesh(samples, other)
        if inside.any():
            tris = other.tri_array()
            for p in samples[inside]:
                sq = point_triangle_sqdist(np.broadcast_to(p, (len(tris), 3)), tris)
                depth = max(depth, float(np.sqrt(sq.min())))
    return depth
