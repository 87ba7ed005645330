"""Procedural test scenes: voxel blocks, pockets, and blocked passages.

The soma-style scenes assemble a Z-shaped, a T-shaped, and a tri-shaped
block (plus an L and a straight bar for the larger variants) into an
interlocking structure on the table. The remaining scenes isolate one
planner behavior each: `pocket` is a straight-down insertion, `enclosure`
is unassemblable by construction, `handle_hole` blocks the only approach
path with an overhanging handle, and `sym2` has two equally good orders.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedVoxels, UnknownScene
from .geometry import Mesh, Pose, rotation_between
from .grasping import GripperModel
from .problem import AssemblyProblem, Part, SamplerSettings, Tolerances

CELL = 10.0  # mm

# quad corner offsets per face direction, wound so normals point outward
_FACE_CORNERS = {
    (1, 0, 0): [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)],
    (-1, 0, 0): [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)],
    (0, 1, 0): [(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)],
    (0, -1, 0): [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)],
    (0, 0, 1): [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
    (0, 0, -1): [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)],
}


@dataclass(frozen=True)
class VoxelSpec:
    """Face-connected set of occupied integer cells at a given cell size."""

    cells: tuple
    size: float = CELL

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(tuple(c) for c in self.cells))
        if not self.cells:
            raise ValueError("voxel spec needs at least one cell")


def voxel_mesh(spec: VoxelSpec) -> Mesh:
    """Closed mesh of the voxel solid, internal faces removed.

    Raises DisconnectedVoxels when the cells do not form one
    face-connected component.
    """
    cells = set(spec.cells)
    seen = {next(iter(cells))}
    frontier = deque(seen)
    while frontier:
        c = frontier.popleft()
        for d in _FACE_CORNERS:
            nb = (c[0] + d[0], c[1] + d[1], c[2] + d[2])
            if nb in cells and nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    if seen != cells:
        raise DisconnectedVoxels(
            f"{len(cells) - len(seen)} of {len(cells)} cells unreachable "
            "by face adjacency")

    corner_index = {}
    verts = []
    tris = []

    def corner(ix, iy, iz):
        key = (ix, iy, iz)
        if key not in corner_index:
            corner_index[key] = len(verts)
            verts.append([ix * spec.size, iy * spec.size, iz * spec.size])
        return corner_index[key]

    for c in sorted(cells):
        for d, offsets in _FACE_CORNERS.items():
            nb = (c[0] + d[0], c[1] + d[1], c[2] + d[2])
            if nb in cells:
                continue  # internal face
            quad = [corner(c[0] + o[0], c[1] + o[1], c[2] + o[2])
                    for o in offsets]
            tris.append([quad[0], quad[1], quad[2]])
            tris.append([quad[0], quad[2], quad[3]])
    return Mesh(np.array(verts, dtype=float), np.array(tris, dtype=np.int64))


def part_from_cells(part_id, cells, size=CELL) -> Part:
    """Part whose mesh sits at its own origin; the pose places it in the
    assembly at the given absolute cell coordinates."""
    cells = [tuple(c) for c in cells]
    mins = np.min(np.array(cells), axis=0)
    local = [tuple(int(x) for x in (np.array(c) - mins)) for c in cells]
    mesh = voxel_mesh(VoxelSpec(tuple(local), size))
    return Part(id=part_id, mesh=mesh,
                pose=Pose.from_translation(mins.astype(float) * size))


def arrow_mesh(origin, direction, length=40.0, shaft=3.0, head=6.0,
               head_len=12.0) -> Mesh:
    """Closed single-solid arrow from `origin` along `direction`."""
    s, is_, hl = shaft / 2.0, head / 2.0, head_len
    body = length - hl
    verts = [
        [-s, -s, 0], [s, -s, 0], [s, s, 0], [-s, s, 0],
        [-s, -s, body], [s, -s, body], [s, s, body], [-s, s, body],
        [-is_, -is_, body], [is_, -is_, body], [is_, is_, body], [-is_, is_, body],
        [0, 0, length],
    ]
    quads = [
        (0, 3, 2, 1),                     # base cap (facing -Z)
        (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7),   # shaft
        (4, 5, 9, 8), (5, 6, 10, 9), (6, 7, 11, 10), (7, 4, 8, 11),  # collar
    ]
    tris = []
    for (a, b, c, d) in quads:
        tris += [[a, b, c], [a, c, d]]
    for a, b in ((8, 9), (9, 10), (10, 11), (11, 8)):
        tris.append([a, b, 12])
    rot = rotation_between([0.0, 0.0, 1.0], direction)
    pose = Pose(rot, np.asarray(origin, dtype=float))
    return Mesh(pose.apply(np.array(verts, dtype=float)), tris)


# ---------------------------------------------------------------------------
# scenes
# ---------------------------------------------------------------------------

_WIDE_GRIPPER = GripperModel(max_width=80.0, finger=(60.0, 8.0, 8.0),
                             palm=(100.0, 24.0, 24.0), standoff=62.0, mu=0.5)

_SOMA_T = [(0, 0, 0), (1, 0, 0), (2, 0, 0), (1, 1, 0)]
_SOMA_TRI = [(0, 1, 0), (0, 1, 1), (0, 0, 1)]
_SOMA_Z = [(2, 1, 0), (2, 1, 1), (2, 0, 1), (1, 0, 1)]
_SOMA_L = [(0, 0, 2), (1, 0, 2), (2, 0, 2), (0, 0, 3)]
_SOMA_SL = [(0, 1, 2), (1, 1, 2), (2, 1, 2)]


def _cube_cells(n):
    return [(x, y, z) for x in range(n) for y in range(n) for z in range(n)]


def _scene_stack3():
    parts = [
        part_from_cells("A", [(x, y, 0) for x in range(3) for y in range(3)]
                        + [(x, y, 1) for x in range(3) for y in range(3)]
                        + [(x, y, 2) for x in range(3) for y in range(3)]),
        part_from_cells("B", [(x, y, z + 3) for (x, y, z) in _cube_cells(3)]),
        part_from_cells("C", [(x, y, z + 6) for (x, y, z) in _cube_cells(3)]),
    ]
    return AssemblyProblem(parts, sampler=SamplerSettings(n_samples=200, seed=0))


def _scene_soma3():
    parts = [
        part_from_cells("Z", _SOMA_Z),
        part_from_cells("T", _SOMA_T),
        part_from_cells("Tri", _SOMA_TRI),
    ]
    return AssemblyProblem(parts, sampler=SamplerSettings(n_samples=200, seed=0))


def _scene_soma4():
    parts = [
        part_from_cells("Z", _SOMA_Z),
        part_from_cells("T", _SOMA_T),
        part_from_cells("Tri", _SOMA_TRI),
        part_from_cells("L", _SOMA_L),
    ]
    return AssemblyProblem(parts, sampler=SamplerSettings(n_samples=200, seed=0))


def _scene_soma5():
    parts = [
        part_from_cells("Z", _SOMA_Z),
        part_from_cells("T", _SOMA_T),
        part_from_cells("Tri", _SOMA_TRI),
        part_from_cells("L", _SOMA_L),
        part_from_cells("Sl", _SOMA_SL),
    ]
    return AssemblyProblem(parts, sampler=SamplerSettings(n_samples=150, seed=0))


def _pocket_base_cells():
    cells = [(x, y, 0) for x in range(3) for y in range(3)]
    cells += [(x, y, 1) for x in range(3) for y in range(3) if (x, y) != (1, 1)]
    return cells


def _scene_pocket():
    parts = [
        part_from_cells("base", _pocket_base_cells()),
        part_from_cells("peg", [(1, 1, 1), (1, 1, 2)]),
    ]
    return AssemblyProblem(parts, sampler=SamplerSettings(n_samples=200, seed=0))


def _scene_enclosure():
    # The core's foot reaches the table through a hole in the shell floor,
    # so core-first is stable; shell-second then touches the core from all
    # six directions at once, which no translation can assemble.
    shell = [(x, y, z) for x in range(5) for y in range(5) for z in range(5)
             if not (1 <= x <= 3 and 1 <= y <= 3 and 1 <= z <= 3)
             and (x, y, z) != (2, 2, 0)]
    core = [(2, 2, 0)] + [(x, y, z) for x in range(1, 4) for y in range(1, 4)
                          for z in range(1, 4)]
    parts = [
        part_from_cells("core", core),
        part_from_cells("shell", shell),
    ]
    return AssemblyProblem(parts, gripper=_WIDE_GRIPPER,
                           sampler=SamplerSettings(n_samples=150, seed=0))


def handle_hole_problem(with_handle=True) -> AssemblyProblem:
    """Slab with a through-hole; an arch over the hole blocks the drop-in."""
    slab = [(x, y, 0) for x in range(5) for y in range(3) if (x, y) != (2, 1)]
    handle = [(2, 0, 1), (2, 0, 2), (2, 1, 2), (2, 2, 2), (2, 2, 1)]
    base_cells = slab + handle if with_handle else slab
    parts = [
        part_from_cells("base", base_cells),
        part_from_cells("block", [(2, 1, 0)]),
    ]
    return AssemblyProblem(parts, sampler=SamplerSettings(n_samples=200, seed=0))


def _scene_sym2():
    cube = _cube_cells(3)
    parts = [
        part_from_cells("left", cube),
        part_from_cells("right", [(x + 15, y, z) for (x, y, z) in cube]),
    ]
    return AssemblyProblem(parts, sampler=SamplerSettings(n_samples=150, seed=0))


def deep_pocket_problem() -> AssemblyProblem:
    """Unassemblable either way: the block floats without the base, and
    inside the base's deep sleeve no collision-free grasp remains."""
    floor = [(x, y, 0) for x in range(3) for y in range(3)]
    walls = [(x, y, z) for x in range(3) for y in range(3)
             for z in (1, 2, 3) if (x, y) != (1, 1)]
    parts = [
        part_from_cells("block", [(1, 1, 1)]),
        part_from_cells("base", floor + walls),
    ]
    return AssemblyProblem(parts, gripper=_WIDE_GRIPPER,
                           sampler=SamplerSettings(n_samples=150, seed=0))


_SCENES = {
    "stack3": _scene_stack3,
    "soma3": _scene_soma3,
    "soma4": _scene_soma4,
    "soma5": _scene_soma5,
    "pocket": _scene_pocket,
    "enclosure": _scene_enclosure,
    "handle_hole": handle_hole_problem,
    "sym2": _scene_sym2,
}

SCENE_NAMES = sorted(_SCENES)


def make_scene(name) -> AssemblyProblem:
    """Deterministic named scene with meshes, goal poses, and defaults."""
    try:
        builder = _SCENES[name]
    except KeyError:
        raise UnknownScene(
            f"unknown scene {name!r}; choose from {SCENE_NAMES}") from None
    return builder()
