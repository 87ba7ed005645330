"""Post-placement stability of the manipulated object.

An object is stable when the horizontal projection of its center of mass
falls strictly inside the convex hull of its projected support patches.
The quality measures how deep: take the nearest point p_b on the 3D
support boundary to the center of mass and the angle theta between
p_b -> com and the horizontal plane; a flatter vector means the com sits
farther inside relative to its height, so quality = 1 - theta / (pi/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import asin, pi

import numpy as np

from .contacts import ContactSet, detect_contacts, support_contacts
from .geometry import Mesh, convex_hull, hull_signed_distance, nearest_on_polyline

EPS_STAB = 0.1  # com must be this many mm inside the support hull (absolute)


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    p_b: np.ndarray | None   # nearest support-boundary point, None if unstable
    theta: float             # radians in [0, pi/2]
    quality: float           # 1 - theta/(pi/2) when stable, else 0

    def __post_init__(self):
        if self.p_b is not None:
            self.p_b.flags.writeable = False


_UNSTABLE = StabilityResult(stable=False, p_b=None, theta=pi / 2, quality=0.0)


def evaluate_stability(obj: Mesh, supports: ContactSet,
                       eps_stab=EPS_STAB) -> StabilityResult:
    """Score the stability of `obj` resting on the given support contacts.

    `supports` should already be filtered by `support_contacts`. An empty
    support set, or a projected com outside (or within `eps_stab` of) the
    support hull boundary, yields the zero-quality unstable result.
    """
    patches = [c.patch for c in supports.contacts if len(c.patch)]
    if not patches:
        return _UNSTABLE
    verts3d = np.vstack(patches)
    if len(verts3d) < 3:
        return _UNSTABLE
    hull = convex_hull(verts3d[:, :2])
    if hull.rank < 2:
        return _UNSTABLE
    com = np.asarray(obj.com, dtype=float)
    sd = hull_signed_distance(hull, com[:2])
    if sd >= -eps_stab:
        return _UNSTABLE  # outside, or too close to the edge to trust
    # lift the 2D hull ring back to the original 3D support vertices
    loop3d = verts3d[hull.source_index]
    p_b, dist = nearest_on_polyline(loop3d, com)
    theta = asin(min(1.0, abs(com[2] - p_b[2]) / dist)) if dist > 0 else 0.0
    return StabilityResult(stable=True, p_b=p_b, theta=theta,
                           quality=1.0 - theta / (pi / 2))


def stability_row(order, problem) -> np.ndarray:
    """Stability qualities for one assembly order, left to right.

    Entry j scores object order[j] placed after order[:j]. Evaluation
    stops at the first zero; later entries are NaN (unevaluated).
    """
    out = np.full(len(order), np.nan)
    tol = problem.tolerances
    for j, part_id in enumerate(order):
        placed = [(pid, problem.world_mesh(pid)) for pid in order[:j]]
        cs = detect_contacts(problem.world_mesh(part_id), placed,
                             include_table=True, object_id=part_id,
                             delta_c=tol.delta_c)
        sup = support_contacts(cs, tol.alpha_sup)
        result = evaluate_stability(problem.world_mesh(part_id), sup,
                                    eps_stab=tol.eps_stab)
        out[j] = result.quality
        if result.quality == 0.0:
            break
    return out
