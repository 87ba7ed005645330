"""Antipodal force-closure grasp sampling for a parallel-jaw gripper.

Grasps are sampled once per part in the part's own frame and cached; at
each assembly step the cached set is posed into the world and filtered
against the table and the already-placed parts. The count of surviving
grasps is the graspability of that step.

Gripper geometry is parametric (two finger boxes and a palm box) rather
than an arbitrary hand mesh, which keeps collision checks exact. The
gripper frame has x along the jaw (closing) axis, z along the approach
direction with the fingertip plane at z = 0, and the body extending
toward negative z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collision import meshes_intersect
from .geometry import DELTA_C, Mesh, Pose

# Extra jaw opening on each side so fingers clear the faces they grip.
FINGER_CLEARANCE = DELTA_C
# Collision checks pose the hand pre-close: jaws open this much wider than
# the grasp width on each side (capped by max_width), the way a physical
# gripper approaches before closing. Tilted antipodal pairs would otherwise
# rake the finger bodies through the part and nothing would ever sample.
OPEN_MARGIN = 5.0

_BOX_TRIS = np.array([
    [0, 2, 1], [0, 3, 2], [4, 5, 6], [4, 6, 7],
    [0, 1, 5], [0, 5, 4], [1, 2, 6], [1, 6, 5],
    [2, 3, 7], [2, 7, 6], [3, 0, 4], [3, 4, 7],
], dtype=np.int64)

_UNIT_BOX = np.array([
    [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
    [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
], dtype=float) - 0.5


@dataclass(frozen=True)
class GripperModel:
    """Parallel-jaw gripper parameters (mm, friction dimensionless).

    finger dims are (length along approach, thickness along jaw, lateral
    width); palm dims are (along jaw, lateral, depth behind the fingers);
    standoff is the palm-front-to-fingertip distance.
    """

    max_width: float
    finger: tuple
    palm: tuple
    standoff: float
    mu: float

    def __post_init__(self):
        dims = (self.max_width, *self.finger, *self.palm, self.standoff, self.mu)
        if any(d <= 0 for d in dims):
            raise ValueError("gripper dimensions and mu must be positive")


@dataclass(frozen=True)
class Grasp:
    """One parallel-jaw grasp: a closing segment plus an approach frame."""

    center: np.ndarray
    jaw_axis: np.ndarray
    approach: np.ndarray
    width: float

    def __post_init__(self):
        for arr in (self.center, self.jaw_axis, self.approach):
            arr.flags.writeable = False

    @property
    def hand_pose(self) -> Pose:
        """Gripper frame: x = jaw_axis, z = approach, origin at center."""
        x = self.jaw_axis
        z = self.approach
        y = np.cross(z, x)
        return Pose(np.column_stack([x, y, z]), self.center)

    def transformed(self, pose: Pose) -> "Grasp":
        return Grasp(center=pose.apply(self.center),
                     jaw_axis=pose.apply_vector(self.jaw_axis),
                     approach=pose.apply_vector(self.approach),
                     width=self.width)


def antipodal_pair_ok(p1, n1, p2, n2, mu) -> bool:
    """Two-contact force closure: the connecting line lies in both friction
    cones, i.e. its angle to each inward surface normal is <= atan(mu)."""
    d = np.asarray(p2, dtype=float) - np.asarray(p1, dtype=float)
    dist = np.linalg.norm(d)
    if dist < 1e-9:
        return False
    u = d / dist
    cos_lim = 1.0 / math.sqrt(1.0 + mu * mu)  # cos(atan(mu))
    return (float(np.dot(u, -np.asarray(n1))) >= cos_lim - 1e-12
            and float(np.dot(-u, -np.asarray(n2))) >= cos_lim - 1e-12)


def gripper_solid(g: GripperModel, width, hand_pose: Pose):
    """The three collision boxes (two fingers, palm) at a hand pose.

    The jaws are posed at the pre-close opening, not at the final grasp
    width (see OPEN_MARGIN).
    """
    fl, fw, ft = g.finger
    px, py, pz = g.palm
    margin = max(FINGER_CLEARANCE, min(OPEN_MARGIN, (g.max_width - width) / 2.0))
    half_open = width / 2.0 + margin
    boxes = []
    for sign in (+1.0, -1.0):
        center = np.array([sign * (half_open + fw / 2.0), 0.0, -fl / 2.0])
        boxes.append((center, np.array([fw, ft, fl])))
    boxes.append((np.array([0.0, 0.0, -g.standoff - pz / 2.0]),
                  np.array([px, py, pz])))
    meshes = []
    for center, dims in boxes:
        verts = _UNIT_BOX * dims + center
        meshes.append(Mesh(hand_pose.apply(verts), _BOX_TRIS))
    return meshes


def _roll_frame(jaw_axis):
    z = np.array([0.0, 0.0, 1.0])
    e1 = np.cross(jaw_axis, z)
    if np.linalg.norm(e1) < 1e-9:
        e1 = np.cross(jaw_axis, [1.0, 0.0, 0.0])
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(jaw_axis, e1)


def sample_force_closure_grasps(m: Mesh, g: GripperModel, n_samples=200,
                                n_rolls=8, seed=0):
    """Sample antipodal force-closure grasps on a mesh, in the mesh frame.

    Deterministic for a fixed seed: `n_samples` surface point pairs are
    drawn area-uniformly, kept when the connecting line satisfies the
    friction-cone condition at both ends and fits inside max_width, then
    expanded into `n_rolls` approach directions. Grasps whose gripper
    solid intersects the object itself are dropped. An empty result is
    valid (nothing graspable).
    """
    if n_samples < 1 or n_rolls < 1:
        raise ValueError("n_samples and n_rolls must be >= 1")
    rng = np.random.default_rng(seed)
    areas = m.face_areas()
    prob = areas / areas.sum()
    tri_idx = rng.choice(len(areas), size=(n_samples, 2), p=prob)
    r1 = rng.random(size=(n_samples, 2))
    r2 = rng.random(size=(n_samples, 2))
    normals = m.face_normals()
    tris = m.tri_array()

    sq = np.sqrt(r1)
    w0 = 1.0 - sq
    w1 = sq * (1.0 - r2)
    w2 = sq * r2
    grasps = []
    for i in range(n_samples):
        ia, ib = tri_idx[i]
        p1 = (w0[i, 0] * tris[ia, 0] + w1[i, 0] * tris[ia, 1]
              + w2[i, 0] * tris[ia, 2])
        p2 = (w0[i, 1] * tris[ib, 0] + w1[i, 1] * tris[ib, 1]
              + w2[i, 1] * tris[ib, 2])
        n1, n2 = normals[ia], normals[ib]
        d = p2 - p1
        width = float(np.linalg.norm(d))
        if width < 1e-6 or width > g.max_width:
            continue
        if not antipodal_pair_ok(p1, n1, p2, n2, g.mu):
            continue
        jaw = d / width
        center = 0.5 * (p1 + p2)
        e1, e2 = _roll_frame(jaw)
        for k in range(n_rolls):
            phi = 2.0 * math.pi * k / n_rolls
            approach = math.cos(phi) * e1 + math.sin(phi) * e2
            grasp = Grasp(center=center.copy(), jaw_axis=jaw.copy(),
                          approach=approach, width=width)
            solid = gripper_solid(g, width, grasp.hand_pose)
            if any(meshes_intersect(box, m, 0.0) for box in solid):
                continue
            grasps.append(grasp)
    return grasps


def accessible_grasps(grasps, obj_pose: Pose, obstacles, gripper: GripperModel,
                      include_table=True, delta_c=DELTA_C):
    """Filter precomputed (object-frame) grasps by world collisions.

    A grasp survives when its gripper solid, posed by `obj_pose`, keeps
    `delta_c` clearance from the table plane and every obstacle mesh.
    """
    kept = []
    for grasp in grasps:
        world = grasp.transformed(obj_pose)
        solid = gripper_solid(gripper, world.width, world.hand_pose)
        if include_table and any(
                box.vertices[:, 2].min() <= delta_c for box in solid):
            continue
        if any(meshes_intersect(box, obs, delta_c)
               for obs in obstacles for box in solid):
            continue
        kept.append(world)
    return kept


def accessible_for_step(problem, object_id, placed_ids):
    """World-frame accessible grasps of one object at one assembly step."""
    cached = problem.grasp_cache(object_id)
    obstacles = [problem.world_mesh(pid) for pid in placed_ids]
    return accessible_grasps(cached, problem.world_goal_pose(object_id),
                             obstacles, problem.gripper,
                             include_table=True,
                             delta_c=problem.tolerances.delta_c)


def graspability(object_id, placed_ids, problem) -> int:
    """Count of accessible grasps for `object_id` after `placed_ids`.

    The first object of an order has an empty placed set, so only the
    table constrains its grasps. Zero marks the step infeasible.
    """
    return len(accessible_for_step(problem, object_id, placed_ids))
