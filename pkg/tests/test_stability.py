import math

import numpy as np
import pytest

from asmplan.contacts import ContactSet, detect_contacts, support_contacts
from asmplan.geometry import Mesh, Pose, transform_mesh
from asmplan.stability import evaluate_stability

from conftest import box_mesh


def supports_for(obj, bases, include_table=True):
    cs = detect_contacts(obj, bases, include_table=include_table)
    return support_contacts(cs)


def centered_box(size):
    sx, sy, sz = size
    return box_mesh(size=size, origin=(-sx / 2, -sy / 2, 0.0))


def test_cube_on_table_closed_form():
    # com at height 0.5, nearest boundary at horizontal distance 0.5
    cube = centered_box((1.0, 1.0, 1.0))
    res = evaluate_stability(cube, supports_for(cube, []), eps_stab=0.01)
    assert res.stable
    assert res.theta == pytest.approx(math.atan(0.5 / 0.5), abs=1e-9)
    assert res.quality == pytest.approx(0.5, abs=1e-9)
    # tie over four edge midpoints resolved to the lowest-index segment
    assert np.allclose(res.p_b, [0.5, 0.0, 0.0], atol=1e-9)
    mids = {(0.5, 0.0, 0.0), (-0.5, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, -0.5, 0.0)}
    assert tuple(np.round(res.p_b, 9)) in mids


def test_plate_closed_form():
    plate = centered_box((1.0, 1.0, 0.1))
    res = evaluate_stability(plate, supports_for(plate, []), eps_stab=0.01)
    assert res.stable
    want_theta = math.atan(0.05 / 0.5)
    assert res.theta == pytest.approx(want_theta, abs=1e-9)
    assert res.quality == pytest.approx(1.0 - want_theta / (math.pi / 2), abs=1e-6)
    assert res.quality == pytest.approx(0.9365, abs=1e-3)


def test_overhang_unstable():
    base = box_mesh(size=(10, 10, 10))
    # com projects at x=14, support patch only spans x in [5, 10]
    ledge = box_mesh(size=(18, 10, 10), origin=(5, 0, 10))
    cs = supports_for(ledge, [("base", base)], include_table=False)
    res = evaluate_stability(ledge, cs)
    assert not res.stable
    assert res.quality == 0.0
    assert res.p_b is None


def test_no_support_is_unstable():
    cube = centered_box((1, 1, 1))
    res = evaluate_stability(cube, ContactSet((), "cube"))
    assert not res.stable
    assert res.quality == 0.0


def test_quality_monotone_in_com_height():
    sizes = [0.2, 0.5, 1.0, 2.0, 5.0]
    qualities = []
    for h in sizes:
        block = centered_box((1.0, 1.0, h))
        res = evaluate_stability(block, supports_for(block, []), eps_stab=0.01)
        qualities.append(res.quality)
    assert all(a > b for a, b in zip(qualities, qualities[1:]))


def test_translation_invariance():
    cube = centered_box((1, 1, 1))
    base_res = evaluate_stability(cube, supports_for(cube, []), eps_stab=0.01)
    for shift in ([3, 0, 0], [0, -7, 0], [12.5, 4.5, 0]):
        pose = Pose.from_translation(shift)
        moved = transform_mesh(cube, pose)
        res = evaluate_stability(moved, supports_for(moved, []), eps_stab=0.01)
        assert res.quality == pytest.approx(base_res.quality, abs=1e-9)
        assert res.theta == pytest.approx(base_res.theta, abs=1e-9)
        assert np.allclose(res.p_b, pose.apply(base_res.p_b), atol=1e-9)


def test_boundary_margin_is_conservative():
    # com exactly over the support edge: classified unstable
    base = box_mesh(size=(10, 10, 10))
    slab = box_mesh(size=(10, 10, 2), origin=(5, 0, 10))
    half_on = transform_mesh(slab, Pose.identity())
    cs = supports_for(half_on, [("base", base)], include_table=False)
    res = evaluate_stability(half_on, cs)
    assert not res.stable

    # com 0.05 mm inside with eps_stab=0.1: still unstable (conservative)
    slab2 = box_mesh(size=(10, 10, 2), origin=(4.95, 0, 10))
    cs2 = supports_for(slab2, [("base", base)], include_table=False)
    assert not evaluate_stability(slab2, cs2, eps_stab=0.1).stable
    # com 1 mm inside: stable
    slab3 = box_mesh(size=(10, 10, 2), origin=(4.0, 0, 10))
    cs3 = supports_for(slab3, [("base", base)], include_table=False)
    assert evaluate_stability(slab3, cs3, eps_stab=0.1).stable


def test_closed_form_theta_against_implementation():
    # single horizontal support at z=0, com at height h, boundary distance r
    rng = np.random.default_rng(23)
    for _ in range(10):
        w = float(rng.uniform(0.5, 4.0))
        h = float(rng.uniform(0.1, 5.0))
        block = centered_box((2 * w, 2 * w, h))
        res = evaluate_stability(block, supports_for(block, []), eps_stab=0.01)
        assert res.theta == pytest.approx(math.atan((h / 2) / w), abs=1e-6)


def test_elevated_support_uses_3d_boundary():
    # beam bridging a tall pillar and the table: boundary loop is 3D
    pillar = box_mesh(size=(10, 10, 10))
    beam_mesh = Mesh(
        np.array([
            [0, 0, 10], [10, 0, 10], [10, 10, 10], [0, 10, 10],
            [0, 0, 20], [10, 0, 20], [10, 10, 20], [0, 10, 20],
        ], dtype=float),
        box_mesh().triangles)
    cs = detect_contacts(beam_mesh, [("pillar", pillar)], include_table=False)
    sup = support_contacts(cs)
    res = evaluate_stability(beam_mesh, sup)
    assert res.stable
    assert res.p_b[2] == pytest.approx(10.0)  # boundary on the pillar top


def test_stability_row_stacked_cubes():
    from asmplan.fixtures import make_scene
    from asmplan.stability import stability_row
    stack = make_scene("stack3")
    bottom_up = stability_row(["A", "B", "C"], stack)
    assert (bottom_up > 0).all()
    top_first = stability_row(["C", "B", "A"], stack)
    assert top_first[0] == 0.0
    assert np.isnan(top_first[1:]).all()  # short-circuit: unevaluated
    single = stability_row(["A"], stack)
    assert single.shape == (1,)
    assert single[0] > 0
