"""Assembly-sequence planning from part meshes and goal poses.

Given triangle meshes of parts and their poses in the finished assembly,
the planner searches permuted assembly orders, scores each step for
stability, graspability, and assemblability, and returns the optimal
order together with per-step insertion directions and accessible
parallel-jaw grasps.
"""

from .assemblability import (
    AssemblyDirection,
    CaseLabel,
    classify,
    evaluate_assemblability,
    optimal_direction,
    swept_reset,
)
from .contacts import Contact, ContactSet, detect_contacts, support_contacts
from .errors import (
    AsmPlanError,
    DisconnectedVoxels,
    EmptyNormals,
    InconsistentPlan,
    NoFeasibleSequence,
    NonManifold,
    ParseError,
    PenetrationError,
    SchemaError,
    TooManyParts,
    UnknownScene,
    ValidationError,
)
from .fixtures import VoxelSpec, make_scene, voxel_mesh
from .geometry import (
    Hull2D,
    Hull3D,
    Mesh,
    Pose,
    convex_hull,
    load_mesh,
    nearest_on_polyline,
    point_vs_hull,
    save_obj,
    save_stl,
    sweep_poses,
    transform_mesh,
)
from .collision import meshes_intersect
from .grasping import (
    Grasp,
    GripperModel,
    accessible_grasps,
    graspability,
    sample_force_closure_grasps,
)
from .planner import (
    AssemblyPlan,
    EvaluationState,
    QualityMatrices,
    evaluate_all,
    permutations,
    plan,
    select_optimal,
)
from .problem import AssemblyProblem, parse_problem
from .stability import StabilityResult, evaluate_stability, stability_row

__version__ = "0.1.0"

__all__ = [
    "AssemblyDirection", "AssemblyPlan", "AssemblyProblem", "AsmPlanError",
    "CaseLabel", "Contact", "ContactSet", "DisconnectedVoxels", "EmptyNormals",
    "EvaluationState", "Grasp", "GripperModel", "Hull2D", "Hull3D",
    "InconsistentPlan", "Mesh", "NoFeasibleSequence", "NonManifold",
    "ParseError", "PenetrationError", "Pose", "QualityMatrices", "SchemaError",
    "StabilityResult", "TooManyParts", "UnknownScene", "ValidationError",
    "VoxelSpec", "accessible_grasps", "classify", "convex_hull",
    "detect_contacts", "evaluate_all", "evaluate_assemblability",
    "evaluate_stability", "graspability", "load_mesh", "make_scene",
    "meshes_intersect", "nearest_on_polyline", "optimal_direction",
    "parse_problem", "permutations", "plan", "point_vs_hull",
    "sample_force_closure_grasps", "save_obj", "save_stl", "select_optimal",
    "stability_row", "support_contacts", "sweep_poses", "swept_reset",
    "transform_mesh", "voxel_mesh",
]
