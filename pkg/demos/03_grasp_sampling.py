"""Force-closure grasp sampling and accessibility filtering."""

from asmplan import GripperModel, Pose, accessible_grasps, sample_force_closure_grasps
from asmplan.fixtures import VoxelSpec, voxel_mesh

gripper = GripperModel(max_width=50.0, finger=(60.0, 8.0, 8.0),
                       palm=(70.0, 24.0, 24.0), standoff=62.0, mu=0.5)

cube = voxel_mesh(VoxelSpec([(x, y, z) for x in range(3) for y in range(3)
                             for z in range(3)], 10.0))
grasps = sample_force_closure_grasps(cube, gripper, n_samples=200,
                                     n_rolls=8, seed=0)
print(f"force-closure grasps on a free 30mm cube: {len(grasps)}")

free = accessible_grasps(grasps, Pose.identity(), [], gripper)
print(f"accessible on the table (bottom approaches removed): {len(free)}")

# Drop a wall next to the cube and see how many grasps survive
wall = voxel_mesh(VoxelSpec([(0, y, z) for y in range(3) for z in range(4)], 10.0))
from asmplan.geometry import transform_mesh
for gap in (40.0, 20.0, 5.0, 0.0):
    posed_wall = transform_mesh(wall, Pose.from_translation([30.0 + gap, 0, 0]))
    kept = accessible_grasps(grasps, Pose.identity(), [posed_wall], gripper)
    print(f"wall at {gap:4.0f} mm gap -> {len(kept):3d} accessible grasps")

# Friction matters: a slick gripper cannot pinch perpendicular faces
import numpy as np
from asmplan.grasping import antipodal_pair_ok
p1, n1 = np.array([15.0, 0, 0]), np.array([1.0, 0, 0])
p2, n2 = np.array([0.0, 15, 0]), np.array([0.0, 1, 0])
for mu in (0.2, 1.0, 2.0):
    print(f"perpendicular-face pair at mu={mu}: "
          f"{'closes' if antipodal_pair_ok(p1, n1, p2, n2, mu) else 'slips'}")
