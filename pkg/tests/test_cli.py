import json

import numpy as np
import pytest

from asmplan.cli import main
from asmplan.errors import SchemaError, ValidationError
from asmplan.fixtures import make_scene
from asmplan.geometry import load_mesh
from asmplan.problem import parse_problem, problem_from_dict


@pytest.fixture(scope="module")
def stack3_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("stack3")
    assert main(["gen", "stack3", "--dir", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def stack3_plan(stack3_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("plan") / "plan.json"
    code = main(["plan", str(stack3_dir / "problem.json"), "-o", str(out)])
    assert code == 0
    return out


# ---------------------------------------------------------------------------
# parse_problem
# ---------------------------------------------------------------------------

def test_minimal_problem_gets_defaults(stack3_dir, tmp_path):
    minimal = {
        "parts": [
            {"id": "A", "mesh": "stack3_A.obj", "pose": {"t": [0, 0, 0]}},
            {"id": "B", "mesh": "stack3_B.obj", "pose": {"t": [0, 0, 30]}},
        ],
    }
    path = stack3_dir / "minimal.json"
    path.write_text(json.dumps(minimal))
    problem = parse_problem(path)
    assert problem.gripper.max_width == 50.0
    assert problem.tolerances.delta_c == 0.1
    assert problem.sampler.n_samples == 200
    assert problem.world_pose.translation.tolist() == [0, 0, 0]


def test_duplicate_id_rejected(stack3_dir):
    data = json.loads((stack3_dir / "problem.json").read_text())
    data["parts"][1]["id"] = data["parts"][0]["id"]
    with pytest.raises(ValidationError) as err:
        problem_from_dict(data, base_dir=stack3_dir)
    assert data["parts"][0]["id"] in str(err.value)


def test_overlapping_poses_rejected(stack3_dir):
    data = json.loads((stack3_dir / "problem.json").read_text())
    # drop part B onto part A's volume
    for part in data["parts"]:
        if part["id"] == "B":
            part["pose"]["t"] = [0.0, 0.0, 15.0]
    with pytest.raises(ValidationError) as err:
        problem_from_dict(data, base_dir=stack3_dir)
    assert "interpenetrate" in str(err.value)
    assert "mm" in str(err.value)


def test_schema_errors_name_the_field(stack3_dir):
    with pytest.raises(SchemaError) as err:
        problem_from_dict({"parts": [{"id": "A"}]}, base_dir=stack3_dir)
    assert "mesh" in str(err.value)
    with pytest.raises(SchemaError) as err2:
        problem_from_dict({"parts": [{"id": "A", "mesh": "x.obj",
                                      "pose": {"r": [1, 2]}}]},
                          base_dir=stack3_dir)
    assert "pose" in str(err2.value) and "9" in str(err2.value)


def test_missing_mesh_file(stack3_dir):
    data = {"parts": [{"id": "A", "mesh": "missing.obj", "pose": {}}]}
    with pytest.raises(ValidationError) as err:
        problem_from_dict(data, base_dir=stack3_dir)
    assert "missing.obj" in str(err.value)


# ---------------------------------------------------------------------------
# plan command
# ---------------------------------------------------------------------------

def test_plan_schema(stack3_plan):
    payload = json.loads(stack3_plan.read_text())
    assert payload["order"] == ["A", "B", "C"]
    assert len(payload["steps"]) == 3
    for step in payload["steps"]:
        assert set(step) == {"id", "direction", "s", "g", "a", "grasps"}
        assert len(step["direction"]) == 3
        assert step["g"] >= 1
        assert len(step["grasps"]) >= 1
        assert len(step["grasps"]) <= 50
        for grasp in step["grasps"]:
            assert set(grasp) == {"center", "jaw_axis", "approach", "width"}
    assert payload["score"] > 0
    assert payload["ties"] == [["A", "B", "C"]]
    assert "settings" in payload


def test_plan_deterministic_bytes(stack3_dir, tmp_path):
    out1 = tmp_path / "p1.json"
    out2 = tmp_path / "p2.json"
    assert main(["plan", str(stack3_dir / "problem.json"), "-o", str(out1)]) == 0
    assert main(["plan", str(stack3_dir / "problem.json"), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_plan_exit_codes(tmp_path):
    # schema problem -> 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["plan", str(bad), "-o", str(tmp_path / "x.json")]) == 1

    # no solution -> 2, with a report naming the case-I part
    enc_dir = tmp_path / "enc"
    assert main(["gen", "enclosure", "--dir", str(enc_dir)]) == 0
    report_path = tmp_path / "report.json"
    code = main(["plan", str(enc_dir / "problem.json"), "-o", str(report_path)])
    assert code == 2
    report = json.loads(report_path.read_text())
    assert report["error"] == "no_feasible_sequence"
    stages = {(f["part"], f["stage"], f["detail"]) for f in report["failures"]}
    assert ("shell", "assemblability", "case I") in stages

    # too many parts -> 3
    many_dir = tmp_path / "many"
    assert main(["gen", "stack3", "--dir", str(many_dir)]) == 0
    data = json.loads((many_dir / "problem.json").read_text())
    parts = []
    for k in range(9):
        entry = dict(data["parts"][0])
        entry = {"id": f"p{k}", "mesh": entry["mesh"],
                 "pose": {"t": [60.0 * k, 0.0, 0.0]}}
        parts.append(entry)
    data["parts"] = parts
    nine = many_dir / "nine.json"
    nine.write_text(json.dumps(data))
    assert main(["plan", str(nine), "-o", str(tmp_path / "y.json")]) == 3


def test_plan_round_trip(stack3_plan):
    payload = json.loads(stack3_plan.read_text())
    again = json.loads(json.dumps(payload))
    assert again == payload


# ---------------------------------------------------------------------------
# matrices command
# ---------------------------------------------------------------------------

def test_matrices_dump(stack3_dir, tmp_path):
    out = tmp_path / "matrices.json"
    assert main(["matrices", str(stack3_dir / "problem.json"),
                 "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["P"]) == 6
    assert len(data["S"]) == 6
    # pruned rows contain nulls, never silent zeros
    for i, row in enumerate(data["P"]):
        if not data["m"][i]:
            assert None in data["S"][i] or 0.0 in [
                v for v in data["S"][i] if v is not None]
            assert data["row_min"][i] is None
        else:
            assert all(v is not None for v in data["S"][i])
            assert data["row_min"][i] is not None
    # the one feasible row for stack3
    feasible = [i for i, ok in enumerate(data["m"]) if ok]
    assert [data["P"][i] for i in feasible] == [["A", "B", "C"]]


def test_matrices_exhaustive_matches_on_feasible(stack3_dir, tmp_path):
    out_p = tmp_path / "pruned.json"
    out_e = tmp_path / "exhaustive.json"
    problem = str(stack3_dir / "problem.json")
    assert main(["matrices", problem, "-o", str(out_p)]) == 0
    assert main(["matrices", problem, "-o", str(out_e), "--exhaustive"]) == 0
    pruned = json.loads(out_p.read_text())
    exhaustive = json.loads(out_e.read_text())
    assert pruned["m"] == exhaustive["m"]
    for i, ok in enumerate(pruned["m"]):
        if ok:
            assert pruned["S"][i] == exhaustive["S"][i]
            assert pruned["G"][i] == exhaustive["G"][i]
            assert pruned["A"][i] == exhaustive["A"][i]


# ---------------------------------------------------------------------------
# export command
# ---------------------------------------------------------------------------

def _obj_groups(path):
    """Parse an OBJ into {group_name: vertex array} (faces ignored)."""
    groups = {}
    current = None
    verts = []
    starts = {}
    for line in path.read_text().splitlines():
        if line.startswith("o "):
            current = line[2:].strip()
            starts[current] = len(verts)
            groups[current] = []
        elif line.startswith("v "):
            verts.append([float(x) for x in line.split()[1:4]])
            groups[current].append(verts[-1])
    return {k: np.array(v) for k, v in groups.items()}


def test_export_step_scenes(stack3_dir, stack3_plan, tmp_path):
    steps_dir = tmp_path / "steps"
    assert main(["export", str(stack3_dir / "problem.json"),
                 str(stack3_plan), "--dir", str(steps_dir)]) == 0
    payload = json.loads(stack3_plan.read_text())
    for k in range(1, 4):
        path = steps_dir / f"step_{k}.obj"
        mesh = load_mesh(path)  # loadable: closed and consistently wound
        groups = _obj_groups(path)
        assert len(groups) == k + 1  # k-1 placed + incoming + arrow
        assert "arrow" in groups
        # arrow points along the planned direction
        arrow = groups["arrow"]
        direction = np.array(payload["steps"][k - 1]["direction"])
        apex = arrow[-1]
        base_center = arrow[:4].mean(axis=0)
        got = apex - base_center
        got /= np.linalg.norm(got)
        assert np.allclose(got, direction, atol=1e-6)


def test_export_step1_has_two_solids(stack3_dir, stack3_plan, tmp_path):
    steps_dir = tmp_path / "steps1"
    assert main(["export", str(stack3_dir / "problem.json"),
                 str(stack3_plan), "--dir", str(steps_dir)]) == 0
    groups = _obj_groups(steps_dir / "step_1.obj")
    assert len(groups) == 2  # incoming part + arrow, nothing placed yet


def test_export_rejects_mismatched_plan(stack3_dir, tmp_path):
    plan_path = tmp_path / "wrong.json"
    plan_path.write_text(json.dumps({
        "order": ["X", "Y", "Z"],
        "steps": [{"id": "X", "direction": [0, 0, -1]}] * 3,
    }))
    code = main(["export", str(stack3_dir / "problem.json"),
                 str(plan_path), "--dir", str(tmp_path / "out")])
    assert code == 1


# ---------------------------------------------------------------------------
# gen command round trip
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("scene", ["soma3", "pocket"])
def test_gen_round_trip(tmp_path, scene):
    out = tmp_path / scene
    assert main(["gen", scene, "--dir", str(out)]) == 0
    problem = parse_problem(out / "problem.json")
    original = make_scene(scene)
    assert problem.ids() == original.ids()
    for pid in problem.ids():
        assert problem.world_mesh(pid).volume == pytest.approx(
            original.world_mesh(pid).volume, rel=1e-9)
        assert np.allclose(problem.world_mesh(pid).com,
                           original.world_mesh(pid).com, atol=1e-9)


def test_plan_all_flag_emits_tie_plans(tmp_path):
    sym_dir = tmp_path / "sym2"
    assert main(["gen", "sym2", "--dir", str(sym_dir)]) == 0
    out = tmp_path / "plan_all.json"
    assert main(["plan", str(sym_dir / "problem.json"), "-o", str(out),
                 "--all"]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["ties"]) == 2
    assert len(payload["tie_plans"]) == 1
    assert payload["tie_plans"][0]["order"] != payload["order"]
    assert len(payload["tie_plans"][0]["steps"]) == 2


def test_plan_seed_and_max_grasps(stack3_dir, tmp_path):
    out = tmp_path / "seeded.json"
    assert main(["plan", str(stack3_dir / "problem.json"), "-o", str(out),
                 "--seed", "7", "--max-grasps", "3"]) == 0
    payload = json.loads(out.read_text())
    assert payload["settings"]["sampler"]["seed"] == 7
    for step in payload["steps"]:
        assert len(step["grasps"]) <= 3
        assert step["g"] >= len(step["grasps"])  # cap trims serialization only
