import math

import numpy as np
import pytest

from asmplan.errors import NonManifold, ParseError
from asmplan.geometry import (
    Hull2D,
    Hull3D,
    Mesh,
    Pose,
    convex_hull,
    hull_signed_distance,
    load_mesh,
    nearest_on_polyline,
    point_vs_hull,
    save_obj,
    save_stl,
    sweep_poses,
    transform_mesh,
)

from conftest import CUBE_TRIS, box_mesh, random_pose

CUBE_OBJ = """\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
"""


# ---------------------------------------------------------------------------
# load_mesh
# ---------------------------------------------------------------------------

def test_load_obj_unit_cube(tmp_path):
    path = tmp_path / "cube.obj"
    path.write_text(CUBE_OBJ)
    m = load_mesh(path)
    assert len(m.vertices) == 8
    assert len(m.triangles) == 12
    assert m.volume == pytest.approx(1.0, abs=1e-12)
    assert m.com == pytest.approx([0.5, 0.5, 0.5], abs=1e-12)


def test_load_stl_matches_obj(tmp_path, unit_cube):
    stl = tmp_path / "cube.stl"
    save_stl(stl, unit_cube)
    m = load_mesh(stl, format="stl-binary")
    assert m.volume == pytest.approx(unit_cube.volume, abs=1e-9)
    assert np.allclose(m.com, unit_cube.com, atol=1e-9)


def test_load_open_surface_rejected(tmp_path):
    lines = CUBE_OBJ.strip().splitlines()
    path = tmp_path / "open.obj"
    path.write_text("\n".join(lines[:-1]) + "\n")  # drop one face
    with pytest.raises(NonManifold):
        load_mesh(path)


def test_load_inconsistent_winding_rejected():
    tris = [list(t) for t in CUBE_TRIS]
    tris[0] = tris[0][::-1]  # flip one face only
    verts = box_mesh().vertices
    with pytest.raises(NonManifold):
        Mesh(verts, tris)


def test_load_rejects_nontriangle_face(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(ParseError):
        load_mesh(path)


def test_obj_round_trip(tmp_path, unit_cube):
    path = tmp_path / "out.obj"
    save_obj(path, unit_cube)
    m = load_mesh(path)
    assert m.volume == pytest.approx(unit_cube.volume, abs=1e-12)
    assert np.allclose(m.com, unit_cube.com, atol=1e-12)


# ---------------------------------------------------------------------------
# transform_mesh
# ---------------------------------------------------------------------------

def test_transform_identity(unit_cube):
    m = transform_mesh(unit_cube, Pose.identity())
    assert np.array_equal(m.vertices, unit_cube.vertices)


def test_transform_translation(unit_cube):
    m = transform_mesh(unit_cube, Pose.from_translation([10, 0, 0]))
    assert np.allclose(m.com, unit_cube.com + [10, 0, 0])
    assert m.volume == pytest.approx(unit_cube.volume, rel=1e-9)


def test_transform_rotation_corner(unit_cube):
    p = Pose.from_axis_angle([0, 0, 1], math.pi / 2)
    m = transform_mesh(unit_cube, p)
    moved = sorted(map(tuple, np.round(m.vertices, 9)))
    assert (0.0, 1.0, 0.0) in [tuple(v) for v in np.round(m.vertices, 9)]
    assert m.volume == pytest.approx(1.0, rel=1e-9)
    assert len(moved) == 8


def test_transform_round_trip(unit_cube):
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = random_pose(rng, translation_scale=30.0)
        back = transform_mesh(transform_mesh(unit_cube, p), p.inverse())
        assert np.abs(back.vertices - unit_cube.vertices).max() < 1e-6


def test_volume_invariant_com_equivariant(unit_cube):
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = random_pose(rng, translation_scale=50.0)
        m = transform_mesh(unit_cube, p)
        assert m.volume == pytest.approx(unit_cube.volume, rel=1e-9)
        assert np.allclose(m.com, p.apply(unit_cube.com), atol=1e-9)


def test_pose_rejects_bad_rotation():
    with pytest.raises(ValueError):
        Pose(np.eye(3) * 2.0, np.zeros(3))
    reflect = np.diag([1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        Pose(reflect, np.zeros(3))


# ---------------------------------------------------------------------------
# convex_hull / point_vs_hull
# ---------------------------------------------------------------------------

def test_hull_tetrahedron():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    h = convex_hull(pts)
    assert isinstance(h, Hull3D)
    assert h.rank == 3
    assert len(h.faces) == 4
    assert sorted(h.source_index) == [0, 1, 2, 3]


def test_hull_coplanar_square_rank2():
    pts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    h = convex_hull(pts)
    assert h.rank == 2
    assert len(h.vertices) == 4
    assert abs(abs(h.plane_normal[2]) - 1.0) < 1e-12


def test_hull_collinear_and_single():
    seg = convex_hull(np.array([[0, 0, 0], [1, 1, 1], [2, 2, 2]], dtype=float))
    assert seg.rank == 1
    assert len(seg.vertices) == 2
    pt = convex_hull(np.array([[3.0, 4.0, 5.0]]))
    assert pt.rank == 0


def test_hull_random_points_containment_oracle():
    # oracle: every input point must classify inside-or-boundary of the hull
    rng = np.random.default_rng(3)
    corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)],
                       dtype=float)
    pts = np.vstack([rng.uniform(0, 1, size=(100, 3)), corners])
    h = convex_hull(pts)
    for p in pts:
        assert point_vs_hull(h, p, tol=1e-7) in ("inside", "boundary")
    # cube corners dominate: every hull vertex is a corner or an extreme sample
    for v in h.vertices:
        assert ((np.abs(pts - v) < 1e-12).all(axis=1)).any()


def test_hull_idempotence():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(40, 3))
    h = convex_hull(pts)
    h2 = convex_hull(h.vertices)
    got = sorted(map(tuple, np.round(h2.vertices, 9)))
    want = sorted(map(tuple, np.round(h.vertices, 9)))
    assert got == want


def test_hull_idempotence_2d():
    rng = np.random.default_rng(6)
    pts = rng.normal(size=(30, 2))
    h = convex_hull(pts)
    assert isinstance(h, Hull2D)
    h2 = convex_hull(h.vertices)
    assert sorted(map(tuple, np.round(h2.vertices, 9))) == \
        sorted(map(tuple, np.round(h.vertices, 9)))


def test_point_vs_hull_trivial():
    pts = np.array([[0, 0, 0], [2, 0, 0], [0, 2, 0], [0, 0, 2]], dtype=float)
    h = convex_hull(pts)
    centroid = pts.mean(axis=0)
    assert point_vs_hull(h, centroid) == "inside"
    assert point_vs_hull(h, [0, 0, 2.0]) == "boundary"
    diameter = 10 * np.linalg.norm(pts.max(0) - pts.min(0))
    assert point_vs_hull(h, centroid + [diameter, 0, 0]) == "outside"


def test_signed_distance_2d_square():
    sq = convex_hull(np.array([[0, 0], [4, 0], [4, 4], [0, 4]], dtype=float))
    assert hull_signed_distance(sq, [2, 2]) == pytest.approx(-2.0)
    assert hull_signed_distance(sq, [5, 2]) == pytest.approx(1.0)
    assert hull_signed_distance(sq, [2, 0]) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# sweep_poses
# ---------------------------------------------------------------------------

def test_sweep_poses_spacing():
    goal = Pose.from_translation([1, 2, 3])
    poses = sweep_poses(goal, [1, 0, 0], offset=100, steps=20)
    assert len(poses) == 21
    xs = [p.translation[0] for p in poses]
    gaps = np.diff(xs)
    assert np.allclose(gaps, 5.0)
    assert np.array_equal(poses[-1].translation, goal.translation)


def test_sweep_poses_two_points():
    goal = Pose.identity()
    poses = sweep_poses(goal, [0, 1, 0], offset=10, steps=1)
    assert len(poses) == 2
    assert np.allclose(poses[0].translation, [0, -10, 0])
    assert np.allclose(poses[1].translation, [0, 0, 0])


def test_sweep_poses_sign_convention():
    goal = Pose.from_translation([0, 0, 5])
    poses = sweep_poses(goal, [0, 0, -1], offset=50, steps=10)
    assert np.allclose(poses[0].translation, [0, 0, 55])


# ---------------------------------------------------------------------------
# nearest_on_polyline
# ---------------------------------------------------------------------------

SQUARE_LOOP = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)


def test_nearest_on_polyline_above_center():
    # hand trig: nearest edge midpoint, distance sqrt(0.5^2 + 1.0^2)
    point, dist = nearest_on_polyline(SQUARE_LOOP, [0.5, 0.5, 1.0])
    assert dist == pytest.approx(math.sqrt(1.25))
    assert np.allclose(point, [0.5, 0.0, 0.0])  # lowest-index segment wins


def test_nearest_on_polyline_vertex():
    point, dist = nearest_on_polyline(SQUARE_LOOP, [1.0, 1.0, 0.0])
    assert dist == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(point, [1, 1, 0])


def test_nearest_on_polyline_perpendicular_foot():
    # closed form: projection of (0.25, -3, 0) onto the bottom edge
    point, dist = nearest_on_polyline(SQUARE_LOOP, [0.25, -3.0, 0.0])
    assert np.allclose(point, [0.25, 0.0, 0.0])
    assert dist == pytest.approx(3.0)


def test_sweep_poses_validation():
    goal = Pose.identity()
    with pytest.raises(ValueError):
        sweep_poses(goal, [2, 0, 0], offset=10, steps=4)  # not unit length
    with pytest.raises(ValueError):
        sweep_poses(goal, [1, 0, 0], offset=0, steps=4)
    with pytest.raises(ValueError):
        sweep_poses(goal, [1, 0, 0], offset=10, steps=0)
