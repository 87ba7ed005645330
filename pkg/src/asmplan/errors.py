"""Exception hierarchy shared across the planner."""


class AsmPlanError(Exception):
    """Base class for all planner errors."""


class ParseError(AsmPlanError):
    """Mesh file is syntactically malformed."""


class NonManifold(AsmPlanError):
    """Mesh is open, inconsistently wound, or geometrically degenerate."""


class PenetrationError(AsmPlanError):
    """Input poses overlap deeper than the contact tolerance."""


class EmptyNormals(AsmPlanError):
    """No contact normals: assembly-direction analysis is undefined."""


class DisconnectedVoxels(AsmPlanError):
    """Voxel cells are not face-connected."""


class UnknownScene(AsmPlanError):
    """Scene name not recognized by the fixture generator."""


class TooManyParts(AsmPlanError):
    """Part count exceeds the permutation guard (search is O(n!))."""


class NoFeasibleSequence(AsmPlanError):
    """Every permuted order hit a zero-quality step.

    Carries the failure records collected during evaluation so callers can
    report which prefixes failed and why.
    """

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)


class SchemaError(AsmPlanError):
    """Problem JSON does not match the expected schema."""


class ValidationError(AsmPlanError):
    """Problem parsed but violates a semantic invariant."""


class InconsistentPlan(AsmPlanError):
    """Plan file does not match the problem (part ids differ)."""
