"""Contact patches and support-polygon stability scoring."""

import numpy as np

from asmplan import detect_contacts, evaluate_stability, support_contacts
from asmplan.fixtures import VoxelSpec, voxel_mesh
from asmplan.geometry import Pose, transform_mesh


def box(cells):
    return voxel_mesh(VoxelSpec(cells, 10.0))


base = box([(x, y, 0) for x in range(3) for y in range(3)])
tower = transform_mesh(box([(0, 0, 0)] * 1), Pose.from_translation([10, 10, 10]))

cs = detect_contacts(tower, [("base", base)], include_table=False)
for c in cs:
    print(f"contact on {c.counterpart}: normal {c.normal.round(3)}, "
          f"area {c.area:.0f} mm^2")

sup = support_contacts(cs)
res = evaluate_stability(tower, sup)
print(f"centered cube: stable={res.stable}, theta={np.degrees(res.theta):.1f} deg, "
      f"quality={res.quality:.3f}")

# Slide the tower toward the edge and watch the quality drop, then vanish
for shift in (0.0, 5.0, 9.0, 12.0):
    moved = transform_mesh(box([(0, 0, 0)]),
                           Pose.from_translation([10 + shift, 10, 10]))
    cs = detect_contacts(moved, [("base", base)], include_table=False)
    res = evaluate_stability(moved, support_contacts(cs))
    print(f"shift {shift:5.1f} mm -> stable={res.stable!s:5} "
          f"quality={res.quality:.3f}")
