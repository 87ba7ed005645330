"""Assembly-direction analysis from contact normals.

Every planar contact constrains the manipulated object's translational
approach: direction t is compatible with a contact of outward normal n
iff t . n >= 0 (the object may press toward a surface it is about to
touch, or slide along it, but not pull through it). The feasible
directions therefore form the polyhedral cone {t : t . n_i >= 0 for all
contacts}.

Instead of sampling that cone, the normal set is classified by its span
rank and by where the origin sits in conv({0} union normal endpoints):
on a vertex, an edge, a face, or inside. Each of the nine resulting
cases fixes the chosen assembly direction and a coarse quality that
rewards clearance from the blocking constraints (a full hemisphere of
slack scores effectively infinite; a single surviving ray scores 1; an
empty cone scores 0). A straight-line swept check from a starting
offset then vetoes directions whose approach path would collide with
the already-placed parts, resetting their quality to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .collision import overlap_beyond
from .contacts import EPS_N_DEG, detect_contacts
from .errors import EmptyNormals
from .geometry import (
    DELTA_C,
    Mesh,
    Pose,
    closest_point_on_hull,
    sweep_poses,
    transform_mesh,
)

# The min-product score needs a finite stand-in for "infinitely assemblable":
# 100 dominates every finite case value (max 10) while keeping products finite.
INF_Q = 100.0
# Tolerance for vertex/edge/face/interior discrimination of the origin.
EPS_CLASS = 1e-6
# Default swept-check parameters.
SWEEP_OFFSET = 150.0
SWEEP_STEPS = 32


class CaseLabel(Enum):
    A_single_vector = "A"
    B_line_through_origin = "B"
    C_polygon_origin_vertex = "C"
    D_polygon_origin_edge = "D"
    E_polygon_origin_inside = "E"
    F_polyhedron_origin_vertex = "F"
    G_polyhedron_origin_edge = "G"
    H_polyhedron_origin_face = "H"
    I_polyhedron_origin_inside = "I"


CASE_QUALITY = {
    CaseLabel.A_single_vector: INF_Q,
    CaseLabel.B_line_through_origin: 10.0,
    CaseLabel.C_polygon_origin_vertex: INF_Q,
    CaseLabel.D_polygon_origin_edge: 3.0,
    CaseLabel.E_polygon_origin_inside: 2.0,
    CaseLabel.F_polyhedron_origin_vertex: INF_Q,
    CaseLabel.G_polyhedron_origin_edge: 3.0,
    CaseLabel.H_polyhedron_origin_face: 1.0,
    CaseLabel.I_polyhedron_origin_inside: 0.0,
}


@dataclass(frozen=True)
class AssemblyDirection:
    """Chosen assembly direction, its quality, and the case that produced it.

    `candidates` holds every direction the swept check may try (two polar
    options in case E, one otherwise, none in case I). quality == 0 iff
    no feasible direction survives.
    """

    n_o: np.ndarray | None
    quality: float
    case: CaseLabel
    candidates: tuple = ()

    def __post_init__(self):
        if self.n_o is not None:
            self.n_o.flags.writeable = False


def dedupe_normals(normals, eps_n_deg=EPS_N_DEG) -> np.ndarray:
    """Merge unit normals within the angular tolerance (first kept wins)."""
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    lens = np.linalg.norm(normals, axis=1)
    if (np.abs(lens - 1.0) > 1e-6).any():
        normals = normals / lens[:, None]
    cos_tol = math.cos(math.radians(eps_n_deg))
    reps = []
    for n in normals:
        if not any(np.dot(n, r) >= cos_tol for r in reps):
            reps.append(n)
    return np.array(reps)


def feasible(t, normals, eps=1e-8) -> bool:
    """Is t inside the feasible cone {t : t . n_i >= -eps}?"""
    t = np.asarray(t, dtype=float)
    return bool((np.asarray(normals) @ t >= -eps).min())


def _rank(normals, tol=EPS_CLASS):
    s = np.linalg.svd(normals, compute_uv=False)
    return int((s > tol).sum())


def _span_basis(normals):
    _, _, vt = np.linalg.svd(normals)
    return vt


def _cyclic_gaps(angles):
    order = np.sort(angles)
    gaps = np.diff(order, append=order[0] + 2.0 * math.pi)
    return order, gaps


def _inplane_components(normals, axis, eps=EPS_CLASS):
    q = normals - np.outer(normals @ axis, axis)
    lens = np.linalg.norm(q, axis=1)
    keep = lens > eps
    return q[keep] / lens[keep][:, None]


def _antipodal_pairs(normals, eps_n_deg=EPS_N_DEG):
    cos_anti = math.cos(math.radians(180.0 - eps_n_deg))
    pairs = []
    for i in range(len(normals)):
        for j in range(i + 1, len(normals)):
            if np.dot(normals[i], normals[j]) <= cos_anti:
                pairs.append((i, j))
    return pairs


def classify(normals) -> CaseLabel:
    """Label a contact-normal set with its constraint-geometry case.

    Rank 1 spans split into A (one direction) and B (both directions);
    rank 2 and 3 spans split by the origin's position in the hull of
    {0} union the normal endpoints: vertex, edge, face, or interior.
    Raises EmptyNormals when there are no normals at all.
    """
    normals = np.asarray(normals, dtype=float)
    if normals.size == 0:
        raise EmptyNormals("no contact normals: object touches nothing")
    normals = dedupe_normals(normals)
    rank = _rank(normals)

    if rank == 1:
        opposed = len(_antipodal_pairs(normals)) > 0
        return (CaseLabel.B_line_through_origin if opposed
                else CaseLabel.A_single_vector)

    if rank == 2:
        basis = _span_basis(normals)[:2]
        flat = normals @ basis.T
        angles = np.arctan2(flat[:, 1], flat[:, 0])
        _, gaps = _cyclic_gaps(angles)
        maxgap = gaps.max()
        if maxgap > math.pi + EPS_CLASS:
            return CaseLabel.C_polygon_origin_vertex
        if maxgap >= math.pi - EPS_CLASS:
            return CaseLabel.D_polygon_origin_edge
        return CaseLabel.E_polygon_origin_inside

    _, dist = closest_point_on_hull(normals, np.zeros(3))
    if dist > EPS_CLASS:
        return CaseLabel.F_polyhedron_origin_vertex
    pairs = _antipodal_pairs(normals)
    if pairs:
        axis = normals[pairs[0][0]]
        q = _inplane_components(normals, axis)
        if len(q) == 0:
            # all normals parallel to the pair axis would be rank 1
            return CaseLabel.I_polyhedron_origin_inside
        basis = _span_basis(q)[:2]
        flat = q @ basis.T
        angles = np.arctan2(flat[:, 1], flat[:, 0])
        _, gaps = _cyclic_gaps(angles)
        maxgap = gaps.max()
        if maxgap > math.pi + EPS_CLASS:
            return CaseLabel.G_polyhedron_origin_edge
        if maxgap >= math.pi - EPS_CLASS:
            return CaseLabel.H_polyhedron_origin_face
        return CaseLabel.I_polyhedron_origin_inside
    if _single_ray(normals) is not None:
        return CaseLabel.H_polyhedron_origin_face
    return CaseLabel.I_polyhedron_origin_inside


def _single_ray(normals, eps=EPS_CLASS):
    """The lone feasible ray of an empty-interior cone, if one exists.

    Candidate rays of a polyhedral cone lie along cross products of
    constraint normals; try both signs of each and keep the first that
    satisfies every constraint.
    """
    n = len(normals)
    for i in range(n):
        for j in range(i + 1, n):
            u = np.cross(normals[i], normals[j])
            norm = np.linalg.norm(u)
            if norm < eps:
                continue
            u = u / norm
            for cand in (u, -u):
                if feasible(cand, normals, eps=1e-8):
                    return cand
    return None


def chebyshev_direction(normals):
    """Deepest-clearance direction: unit vector toward the closest point of
    conv(normals) to the origin. None when the origin is inside that hull."""
    q, dist = closest_point_on_hull(np.asarray(normals, dtype=float), np.zeros(3))
    if dist <= EPS_CLASS:
        return None
    return q / np.linalg.norm(q)


def _inplane_chebyshev(normals, axis):
    """Chebyshev direction restricted to the plane perpendicular to `axis`."""
    q = _inplane_components(normals, axis)
    if len(q) == 0:
        return None
    lifted = chebyshev_direction(q)
    return lifted


def _verified(vec, normals, fallback):
    vec = vec / np.linalg.norm(vec)
    if feasible(vec, normals):
        return vec
    alt = fallback()
    if alt is not None and feasible(alt, normals):
        return alt
    return None


def optimal_direction(label: CaseLabel, normals) -> AssemblyDirection:
    """Per-case optimal direction and quality, before the swept check.

    Directions built from the case formulas are verified against the
    feasibility cone; a formula vector that fails (possible for wide
    fans) falls back to the cone's analytic interior direction.
    """
    normals = dedupe_normals(np.asarray(normals, dtype=float))
    quality = CASE_QUALITY[label]

    if label is CaseLabel.I_polyhedron_origin_inside:
        return AssemblyDirection(None, 0.0, label, ())

    if label is CaseLabel.A_single_vector:
        n_o = normals[0] / np.linalg.norm(normals[0])
        return AssemblyDirection(n_o, quality, label, (n_o,))

    if label is CaseLabel.B_line_through_origin:
        n1 = normals[0]
        p = np.array([0.0, 0.0, -1.0]) - (-n1[2]) * n1
        if np.linalg.norm(p) < 1e-9:
            n_o = np.array([1.0, 0.0, 0.0])  # n1 vertical: any lateral works
        else:
            n_o = p / np.linalg.norm(p)
        return AssemblyDirection(n_o, quality, label, (n_o,))

    if label in (CaseLabel.C_polygon_origin_vertex,
                 CaseLabel.F_polyhedron_origin_vertex):
        n_o = _verified(normals.sum(axis=0), normals,
                        lambda: chebyshev_direction(normals))
        if n_o is None:
            return AssemblyDirection(None, 0.0, label, ())
        return AssemblyDirection(n_o, quality, label, (n_o,))

    if label in (CaseLabel.D_polygon_origin_edge,
                 CaseLabel.G_polyhedron_origin_edge):
        pairs = _antipodal_pairs(normals)
        axis = normals[pairs[0][0]]
        non_axial = [n for n in normals
                     if 1.0 - abs(np.dot(n, axis)) > EPS_CLASS]
        s = np.sum(non_axial, axis=0)
        proj = s - np.dot(s, axis) * axis
        if np.linalg.norm(proj) > 1e-9:
            n_o = _verified(proj, normals, lambda: _inplane_chebyshev(normals, axis))
        else:
            n_o = _inplane_chebyshev(normals, axis)
            if n_o is not None and not feasible(n_o, normals):
                n_o = None
        if n_o is None:
            return AssemblyDirection(None, 0.0, label, ())
        return AssemblyDirection(n_o, quality, label, (n_o,))

    if label is CaseLabel.E_polygon_origin_inside:
        for i in range(len(normals)):
            for j in range(i + 1, len(normals)):
                u = np.cross(normals[i], normals[j])
                norm = np.linalg.norm(u)
                if norm > EPS_CLASS:
                    u = u / norm
                    return AssemblyDirection(u, quality, label, (u, -u))
        return AssemblyDirection(None, 0.0, label, ())

    # case H: exactly one polar direction survives; the face's outward
    # normal is sign-inconsistent with case A, so take the feasible polar
    ray = _single_ray(normals)
    if ray is None:
        return AssemblyDirection(None, 0.0, label, ())
    return AssemblyDirection(ray, quality, label, (ray,))


def swept_reset(direction: AssemblyDirection, obj: Mesh, goal: Pose, finished,
                offset=SWEEP_OFFSET, steps=SWEEP_STEPS, delta_c=DELTA_C,
                include_table=True) -> AssemblyDirection:
    """Veto candidate directions whose straight-line approach collides.

    The object is placed at each pose of the sweep from `offset` mm out
    down to the goal; a candidate survives only if no pose interpenetrates
    a finished entity (or the table) deeper than the contact tolerance,
    so sliding insertions stay legal. If every candidate is blocked the
    quality resets to 0.
    """
    if direction.quality == 0.0 or not direction.candidates:
        return direction
    for cand in direction.candidates:
        blocked = False
        for pose in sweep_poses(goal, cand, offset, steps):
            moved = transform_mesh(obj, pose)
            if include_table and moved.vertices[:, 2].min() < -delta_c:
                blocked = True
                break
            if any(overlap_beyond(moved, ent, delta_c) for ent in finished):
                blocked = True
                break
        if not blocked:
            return AssemblyDirection(np.asarray(cand, dtype=float).copy(),
                                     direction.quality, direction.case, (cand,))
    return AssemblyDirection(None, 0.0, direction.case, ())


def evaluate_assemblability(object_id, placed_ids, problem,
                            contacts=None) -> AssemblyDirection:
    """Contacts -> case -> direction -> swept veto, for one assembly step.

    The object sits at its goal pose against the placed set and the
    table. The first object of an order touches only the table, which is
    a single downward contact normal: case A with a vertical drop.
    """
    tol = problem.tolerances
    placed = [(pid, problem.world_mesh(pid)) for pid in placed_ids]
    if contacts is None:
        contacts = detect_contacts(problem.world_mesh(object_id), placed,
                                   include_table=True, object_id=object_id,
                                   delta_c=tol.delta_c)
    normals = contacts.normals()
    if len(normals) == 0:
        raise EmptyNormals(
            f"{object_id!r} touches nothing at its goal pose; "
            "assembly direction is undefined")
    normals = dedupe_normals(normals)
    label = classify(normals)
    pre = optimal_direction(label, normals)
    if pre.quality == 0.0:
        return pre
    return swept_reset(pre, problem.part_mesh(object_id),
                       problem.world_goal_pose(object_id),
                       [mesh for _, mesh in placed],
                       offset=tol.assembly_offset_mm, steps=tol.sweep_steps,
                       delta_c=tol.delta_c)
