"""Planner input: parts, goal poses, gripper, tolerances, sampler settings.

The JSON schema (defaults injected for anything omitted):

    {
      "parts": [{"id": str, "mesh": path, "pose": {"r": [9 floats row-major],
                                                   "t": [3 floats]}}],
      "world_pose": {"r": [...], "t": [...]},
      "gripper": {"max_width": f, "finger": [3f], "palm": [3f],
                  "standoff": f, "mu": f},
      "tolerances": {"delta_c": f, "eps_stab": f, "alpha_sup": f,
                     "assembly_offset_mm": f, "sweep_steps": i},
      "sampler": {"n_samples": i, "n_rolls": i, "seed": i}
    }

Mesh paths are resolved relative to the problem file. Units are mm,
Z-up, table at z = 0; `world_pose` re-poses the whole assembly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .collision import overlap_beyond, penetration_depth_estimate
from .errors import SchemaError, ValidationError
from .geometry import Mesh, Pose, load_mesh, transform_mesh
from .grasping import GripperModel, sample_force_closure_grasps


@dataclass(frozen=True)
class Tolerances:
    delta_c: float = 0.1
    eps_stab: float = 0.1
    alpha_sup: float = 30.0
    assembly_offset_mm: float = 150.0
    sweep_steps: int = 32


@dataclass(frozen=True)
class SamplerSettings:
    n_samples: int = 200
    n_rolls: int = 8
    seed: int = 0


DEFAULT_GRIPPER = GripperModel(max_width=50.0, finger=(60.0, 8.0, 8.0),
                               palm=(70.0, 24.0, 24.0), standoff=62.0, mu=0.5)


@dataclass(frozen=True)
class Part:
    id: str
    mesh: Mesh            # in the part's own frame
    pose: Pose            # goal pose within the assembly
    mesh_path: str | None = None


class AssemblyProblem:
    """Validated planning input with per-part caches.

    World meshes and force-closure grasp sets are computed once per part
    and reused across every permuted order; both depend only on the part,
    never on the assembly order.
    """

    def __init__(self, parts, world_pose=None, gripper=DEFAULT_GRIPPER,
                 tolerances=Tolerances(), sampler=SamplerSettings(),
                 validate=True):
        self.parts = list(parts)
        self.world_pose = world_pose or Pose.identity()
        self.gripper = gripper
        self.tolerances = tolerances
        self.sampler = sampler
        self._by_id = {p.id: p for p in self.parts}
        self._world_meshes = {}
        self._grasps = {}
        if len(self._by_id) != len(self.parts):
            seen = set()
            for p in self.parts:
                if p.id in seen:
                    raise ValidationError(f"duplicate part id {p.id!r}")
                seen.add(p.id)
        if validate:
            self._check_poses()

    def ids(self):
        return [p.id for p in self.parts]

    def part(self, part_id) -> Part:
        try:
            return self._by_id[part_id]
        except KeyError:
            raise ValidationError(f"unknown part id {part_id!r}") from None

    def part_mesh(self, part_id) -> Mesh:
        return self.part(part_id).mesh

    def world_goal_pose(self, part_id) -> Pose:
        return self.world_pose.compose(self.part(part_id).pose)

    def world_mesh(self, part_id) -> Mesh:
        if part_id not in self._world_meshes:
            self._world_meshes[part_id] = transform_mesh(
                self.part_mesh(part_id), self.world_goal_pose(part_id))
        return self._world_meshes[part_id]

    def grasp_cache(self, part_id):
        """Force-closure grasps in the part frame (computed once per part)."""
        if part_id not in self._grasps:
            s = self.sampler
            self._grasps[part_id] = sample_force_closure_grasps(
                self.part_mesh(part_id), self.gripper,
                n_samples=s.n_samples, n_rolls=s.n_rolls, seed=s.seed)
        return self._grasps[part_id]

    def _check_poses(self):
        tol = self.tolerances.delta_c
        ids = self.ids()
        for pid in ids:
            m = self.world_mesh(pid)
            if m.vertices[:, 2].min() < -tol:
                raise ValidationError(
                    f"part {pid!r} extends below the table plane")
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                ma, mb = self.world_mesh(a), self.world_mesh(b)
                if overlap_beyond(ma, mb, tol):
                    depth = penetration_depth_estimate(ma, mb)
                    raise ValidationError(
                        f"goal poses of {a!r} and {b!r} interpenetrate "
                        f"(~{depth:.3f} mm, tolerance {tol} mm)")

    def with_sampler(self, sampler: SamplerSettings) -> "AssemblyProblem":
        """Same problem with different sampler settings (grasp caches reset)."""
        return AssemblyProblem(self.parts, world_pose=self.world_pose,
                               gripper=self.gripper, tolerances=self.tolerances,
                               sampler=sampler, validate=False)

    def settings_dict(self):
        return {
            "gripper": {
                "max_width": self.gripper.max_width,
                "finger": list(self.gripper.finger),
                "palm": list(self.gripper.palm),
                "standoff": self.gripper.standoff,
                "mu": self.gripper.mu,
            },
            "tolerances": asdict(self.tolerances),
            "sampler": asdict(self.sampler),
        }


def _pose_from_dict(data, where):
    if not isinstance(data, dict):
        raise SchemaError(f"{where}: pose must be an object with 'r' and 't'")
    r = data.get("r", [1, 0, 0, 0, 1, 0, 0, 0, 1])
    t = data.get("t", [0, 0, 0])
    if not (isinstance(r, list) and len(r) == 9):
        raise SchemaError(f"{where}.r: expected 9 floats (row-major rotation)")
    if not (isinstance(t, list) and len(t) == 3):
        raise SchemaError(f"{where}.t: expected 3 floats")
    try:
        return Pose(np.array(r, dtype=float).reshape(3, 3),
                    np.array(t, dtype=float))
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def pose_to_dict(pose: Pose):
    return {"r": [float(x) for x in pose.rotation.reshape(-1)],
            "t": [float(x) for x in pose.translation]}


def _take(data, key, types, where, default=None, required=False):
    if key not in data:
        if required:
            raise SchemaError(f"{where}: missing required field {key!r}")
        return default
    value = data[key]
    if not isinstance(value, types):
        raise SchemaError(f"{where}.{key}: wrong type {type(value).__name__}")
    return value


def problem_from_dict(data, base_dir=".") -> AssemblyProblem:
    """Build and validate a problem from parsed JSON."""
    if not isinstance(data, dict):
        raise SchemaError("problem root must be a JSON object")
    raw_parts = _take(data, "parts", list, "problem", required=True)
    if not raw_parts:
        raise SchemaError("problem.parts: at least one part required")
    base = Path(base_dir)
    parts = []
    for k, entry in enumerate(raw_parts):
        where = f"parts[{k}]"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: must be an object")
        pid = _take(entry, "id", str, where, required=True)
        mesh_path = _take(entry, "mesh", str, where, required=True)
        pose = _pose_from_dict(entry.get("pose", {}), f"{where}.pose")
        full = base / mesh_path
        if not full.exists():
            raise ValidationError(f"{where}: mesh file not found: {full}")
        parts.append(Part(id=pid, mesh=load_mesh(full), pose=pose,
                          mesh_path=mesh_path))

    world_pose = _pose_from_dict(data.get("world_pose", {}), "world_pose")

    g = data.get("gripper", {})
    if not isinstance(g, dict):
        raise SchemaError("gripper: must be an object")
    try:
        gripper = GripperModel(
            max_width=float(g.get("max_width", DEFAULT_GRIPPER.max_width)),
            finger=tuple(g.get("finger", DEFAULT_GRIPPER.finger)),
            palm=tuple(g.get("palm", DEFAULT_GRIPPER.palm)),
            standoff=float(g.get("standoff", DEFAULT_GRIPPER.standoff)),
            mu=float(g.get("mu", DEFAULT_GRIPPER.mu)))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"gripper: {exc}") from exc
    if len(gripper.finger) != 3 or len(gripper.palm) != 3:
        raise SchemaError("gripper.finger and gripper.palm need 3 dims each")

    t = data.get("tolerances", {})
    if not isinstance(t, dict):
        raise SchemaError("tolerances: must be an object")
    unknown = set(t) - {"delta_c", "eps_stab", "alpha_sup",
                        "assembly_offset_mm", "sweep_steps"}
    if unknown:
        raise SchemaError(f"tolerances: unknown fields {sorted(unknown)}")
    tolerances = Tolerances(
        delta_c=float(t.get("delta_c", 0.1)),
        eps_stab=float(t.get("eps_stab", 0.1)),
        alpha_sup=float(t.get("alpha_sup", 30.0)),
        assembly_offset_mm=float(t.get("assembly_offset_mm", 150.0)),
        sweep_steps=int(t.get("sweep_steps", 32)))

    s = data.get("sampler", {})
    if not isinstance(s, dict):
        raise SchemaError("sampler: must be an object")
    sampler = SamplerSettings(
        n_samples=int(s.get("n_samples", 200)),
        n_rolls=int(s.get("n_rolls", 8)),
        seed=int(s.get("seed", 0)))

    return AssemblyProblem(parts, world_pose=world_pose, gripper=gripper,
                           tolerances=tolerances, sampler=sampler)


def parse_problem(path) -> AssemblyProblem:
    """Load, schema-check, and validate a problem JSON file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    return problem_from_dict(data, base_dir=path.parent)
