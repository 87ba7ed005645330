import numpy as np
import pytest

from asmplan.geometry import Mesh

CUBE_TRIS = [
    [0, 2, 1], [0, 3, 2], [4, 5, 6], [4, 6, 7],
    [0, 1, 5], [0, 5, 4], [1, 2, 6], [1, 6, 5],
    [2, 3, 7], [2, 7, 6], [3, 0, 4], [3, 4, 7],
]


def box_mesh(size=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    """Axis-aligned box with min corner at `origin`."""
    sx, sy, sz = size
    ox, oy, oz = origin
    verts = np.array([
        [0, 0, 0], [sx, 0, 0], [sx, sy, 0], [0, sy, 0],
        [0, 0, sz], [sx, 0, sz], [sx, sy, sz], [0, sy, sz],
    ], dtype=float) + np.array([ox, oy, oz])
    return Mesh(verts, CUBE_TRIS)


@pytest.fixture
def unit_cube():
    return box_mesh()


def random_convex_mesh(rng, n_points=20, scale=1.0):
    """Closed convex mesh from the hull of random points."""
    from asmplan.geometry import convex_hull
    pts = rng.normal(size=(n_points, 3)) * scale
    hull = convex_hull(pts)
    return Mesh(hull.vertices, hull.faces)


def random_pose(rng, translation_scale=1.0):
    from asmplan.geometry import Pose
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0, 2 * np.pi)
    t = rng.normal(size=3) * translation_scale
    return Pose.from_axis_angle(axis, angle, t)
