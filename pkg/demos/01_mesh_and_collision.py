"""Meshes, rigid transforms, hulls, and collision queries."""

import numpy as np

from asmplan import Pose, convex_hull, meshes_intersect, point_vs_hull, transform_mesh
from asmplan.fixtures import VoxelSpec, voxel_mesh

# Build an L-shaped block out of 10 mm voxels
block = voxel_mesh(VoxelSpec([(0, 0, 0), (1, 0, 0), (2, 0, 0), (2, 1, 0)], 10.0))
print("L-block:", block)
print("volume", block.volume, "mm^3, com", block.com.round(2), "mm")

# Rigid transforms preserve volume and map the center of mass
pose = Pose.from_axis_angle([0, 0, 1], np.pi / 4, [30, 0, 0])
moved = transform_mesh(block, pose)
print("after 45deg yaw + 30mm shift: volume", round(moved.volume, 6),
      "com", moved.com.round(2))

# Convex hulls handle degenerate inputs by reporting their rank
flat = convex_hull(np.array([[0, 0, 0], [20, 0, 0], [20, 20, 0], [0, 20, 0.0]]))
full = convex_hull(np.vstack([block.vertices, [[15, 15, 40]]]))
print("coplanar square -> rank", flat.rank, "| lifted set -> rank", full.rank,
      "with", len(full.faces), "faces")
print("centroid is", point_vs_hull(full, full.vertices.mean(axis=0)))

# Proximity queries: touching counts as intersecting at clearance 0
neighbor = transform_mesh(block, Pose.from_translation([30, 0, 0]))
gap = transform_mesh(block, Pose.from_translation([31, 0, 0]))
print("face-touching:", meshes_intersect(block, neighbor, 0.0),
      "| 1mm gap at clearance 0.5:", meshes_intersect(block, gap, 0.5),
      "| 1mm gap at clearance 2.0:", meshes_intersect(block, gap, 2.0))
