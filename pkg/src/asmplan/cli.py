"""Command-line front end.

    asmplan plan PROBLEM.json [-o plan.json] [--all] [--exhaustive]
                 [--seed N] [--max-grasps K] [--force]
    asmplan matrices PROBLEM.json [-o matrices.json] [--exhaustive] [--force]
    asmplan export PROBLEM.json PLAN.json --dir OUT/
    asmplan gen SCENE --dir OUT/

Exit codes: 0 success; 1 I/O or schema problem; 2 no feasible sequence
(the output file then contains the infeasibility report); 3 part count
over the O(n!) guard without --force.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .assemblability import SWEEP_OFFSET
from .errors import (
    AsmPlanError,
    InconsistentPlan,
    NoFeasibleSequence,
    NonManifold,
    ParseError,
    SchemaError,
    TooManyParts,
    UnknownScene,
    ValidationError,
)
from .fixtures import SCENE_NAMES, arrow_mesh, make_scene
from .geometry import save_obj, transform_mesh
from .planner import evaluate_all, permutations, plan, select_optimal
from .problem import SamplerSettings, parse_problem, pose_to_dict

EXIT_OK = 0
EXIT_IO = 1
EXIT_NO_SOLUTION = 2
EXIT_LIMITS = 3


def _vec(v):
    return [float(x) for x in v]


def _dump(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def plan_to_dict(result, max_grasps=50):
    steps = []
    for step in result.steps:
        grasps = [{
            "center": _vec(g.center),
            "jaw_axis": _vec(g.jaw_axis),
            "approach": _vec(g.approach),
            "width": float(g.width),
        } for g in step.grasps[:max_grasps]]
        steps.append({
            "id": step.part_id,
            "direction": _vec(step.direction),
            "s": float(step.s),
            "g": int(step.g),
            "a": float(step.a),
            "grasps": grasps,
        })
    return {
        "order": list(result.order),
        "steps": steps,
        "score": float(result.overall),
        "ties": [list(t) for t in result.ties],
        "settings": result.settings,
    }


def _load_problem(args):
    problem = parse_problem(args.problem)
    if getattr(args, "seed", None) is not None:
        problem = problem.with_sampler(
            dataclasses.replace(problem.sampler, seed=args.seed))
    return problem


def cmd_plan(args) -> int:
    problem = _load_problem(args)
    out = Path(args.output) if args.output else Path("plan.json")
    try:
        result = plan(problem, prune=not args.exhaustive, force=args.force)
    except NoFeasibleSequence as exc:
        report = {
            "error": "no_feasible_sequence",
            "message": str(exc),
            "failures": exc.failures,
            "settings": problem.settings_dict(),
        }
        _dump(out, report)
        print(f"no feasible sequence; report written to {out}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    payload = plan_to_dict(result, max_grasps=args.max_grasps)
    if args.all and len(result.ties) > 1:
        payload["tie_plans"] = []
        for order in result.ties[1:]:
            # re-derive the per-step data for each co-optimal order
            tie_payload = _plan_for_order(problem, order, args.max_grasps)
            payload["tie_plans"].append(tie_payload)
    _dump(out, payload)
    print(f"plan with {len(result.steps)} steps written to {out} "
          f"(score {result.overall:g}, {len(result.ties)} co-optimal)")
    return EXIT_OK


def _plan_for_order(problem, order, max_grasps):
    from .grasping import accessible_for_step
    from .planner import EvaluationState
    state = EvaluationState(problem)
    steps = []
    for j, part in enumerate(order):
        placed = frozenset(order[:j])
        s = state.stability_quality(placed, part)
        g = state.grasp_quality(placed, part)
        a, n_o, _ = state.assembly_quality(placed, part)
        grasps = accessible_for_step(problem, part, list(order[:j]))
        steps.append({
            "id": part,
            "direction": _vec(n_o) if n_o is not None else None,
            "s": float(s), "g": int(g), "a": float(a),
            "grasps": [{
                "center": _vec(gr.center),
                "jaw_axis": _vec(gr.jaw_axis),
                "approach": _vec(gr.approach),
                "width": float(gr.width),
            } for gr in grasps[:max_grasps]],
        })
    return {"order": list(order), "steps": steps}


def cmd_matrices(args) -> int:
    problem = _load_problem(args)
    out = Path(args.output) if args.output else Path("matrices.json")
    try:
        P = permutations(problem.ids(), force=args.force)
    except TooManyParts as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_LIMITS
    q = evaluate_all(P, problem, prune=not args.exhaustive)

    def cell(matrix, i, j):
        return float(matrix[i, j]) if q.evaluated[i, j] else None

    rows = len(P)
    cols = len(P[0])
    payload = {
        "P": [list(row) for row in P],
        "S": [[cell(q.S, i, j) for j in range(cols)] for i in range(rows)],
        "G": [[cell(q.G, i, j) for j in range(cols)] for i in range(rows)],
        "A": [[cell(q.A, i, j) for j in range(cols)] for i in range(rows)],
        "Aprime": [[(_vec(q.Aprime[i, j])
                     if q.evaluated[i, j] and not np.isnan(q.Aprime[i, j]).any()
                     else None) for j in range(cols)] for i in range(rows)],
        "m": [bool(x) for x in q.m],
        "row_min": [
            ({"s": float(q.S[i].min()), "g": float(q.G[i].min()),
              "a": float(q.A[i].min())} if q.m[i] else None)
            for i in range(rows)],
        "score": [(q.row_score(i) if q.m[i] else None) for i in range(rows)],
        "failures": q.failures,
        "cells_evaluated": q.cells_evaluated,
        "rows_pruned": q.rows_pruned,
        "settings": problem.settings_dict(),
    }
    _dump(out, payload)
    feasible = len(q.feasible_rows())
    print(f"{rows} orders evaluated ({feasible} feasible) -> {out}")
    return EXIT_OK


def cmd_export(args) -> int:
    problem = parse_problem(args.problem)
    try:
        payload = json.loads(Path(args.plan).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read plan {args.plan}: {exc}") from exc
    order = payload.get("order")
    steps = payload.get("steps")
    if not order or not steps:
        raise SchemaError("plan file lacks 'order'/'steps'")
    if sorted(order) != sorted(problem.ids()):
        raise InconsistentPlan(
            f"plan ids {sorted(order)} do not match problem ids "
            f"{sorted(problem.ids())}")
    outdir = Path(args.dir)
    outdir.mkdir(parents=True, exist_ok=True)
    offset = problem.tolerances.assembly_offset_mm or SWEEP_OFFSET
    for k, step in enumerate(steps, start=1):
        pid = step["id"]
        direction = np.array(step["direction"], dtype=float)
        meshes = []
        names = []
        for done in order[:k - 1]:
            meshes.append(problem.world_mesh(done))
            names.append(f"placed_{done}")
        start_pose = problem.world_goal_pose(pid).translated(-direction * offset)
        incoming = transform_mesh(problem.part_mesh(pid), start_pose)
        meshes.append(incoming)
        names.append(f"incoming_{pid}")
        meshes.append(arrow_mesh(incoming.com, direction,
                                 length=min(60.0, offset / 2)))
        names.append("arrow")
        path = outdir / f"step_{k}.obj"
        save_obj(path, meshes, names)
    print(f"{len(steps)} step scenes written to {outdir}")
    return EXIT_OK


def cmd_gen(args) -> int:
    problem = make_scene(args.scene)
    outdir = Path(args.dir)
    outdir.mkdir(parents=True, exist_ok=True)
    parts_payload = []
    for part in problem.parts:
        mesh_name = f"{args.scene}_{part.id}.obj"
        save_obj(outdir / mesh_name, part.mesh, [part.id])
        parts_payload.append({
            "id": part.id,
            "mesh": mesh_name,
            "pose": pose_to_dict(part.pose),
        })
    payload = {
        "parts": parts_payload,
        "world_pose": pose_to_dict(problem.world_pose),
        **problem.settings_dict(),
    }
    _dump(outdir / "problem.json", payload)
    print(f"scene {args.scene!r} written to {outdir} "
          f"({len(problem.parts)} parts + problem.json)")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="asmplan",
        description="Assembly-sequence planning from part meshes and goal poses")
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="compute the optimal assembly plan")
    p_plan.add_argument("problem")
    p_plan.add_argument("--output", "-o", default="plan.json")
    p_plan.add_argument("--all", action="store_true",
                        help="emit full step data for every tied order")
    p_plan.add_argument("--exhaustive", action="store_true",
                        help="disable prefix pruning")
    p_plan.add_argument("--seed", type=int, default=None,
                        help="override the grasp sampler seed")
    p_plan.add_argument("--max-grasps", type=int, default=50,
                        help="cap on grasps serialized per step")
    p_plan.add_argument("--force", action="store_true",
                        help="ignore the part-count guard")
    p_plan.set_defaults(func=cmd_plan)

    p_mat = sub.add_parser("matrices",
                           help="dump the S/G/A quality matrices")
    p_mat.add_argument("problem")
    p_mat.add_argument("--output", "-o", default="matrices.json")
    p_mat.add_argument("--exhaustive", action="store_true")
    p_mat.add_argument("--seed", type=int, default=None)
    p_mat.add_argument("--force", action="store_true")
    p_mat.set_defaults(func=cmd_matrices)

    p_exp = sub.add_parser("export", help="write per-step OBJ scenes")
    p_exp.add_argument("problem")
    p_exp.add_argument("plan")
    p_exp.add_argument("--dir", required=True)
    p_exp.set_defaults(func=cmd_export)

    p_gen = sub.add_parser("gen", help="generate a built-in scene")
    p_gen.add_argument("scene", choices=SCENE_NAMES)
    p_gen.add_argument("--dir", required=True)
    p_gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TooManyParts as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMITS
    except (SchemaError, ValidationError, ParseError, NonManifold,
            InconsistentPlan, UnknownScene, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NoFeasibleSequence as exc:  # raised outside cmd_plan's handler
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except AsmPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
