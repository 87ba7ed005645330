"""Permutation search over assembly orders with progressive pruning.

Every permutation of part ids is a candidate order. Each order is scored
cell by cell, left to right, in the sequence stability -> graspability ->
assemblability; the first zero kills the order and, crucially, every
other order that shares the same prefix (they would fail identically).
Scores of surviving orders are min(stability) * min(graspability) *
min(assemblability), and all argmax ties are reported.

All three step qualities depend only on the part being placed and the
unordered set of parts already placed, never on the placement order of
that set, so results are memoized by (frozenset(placed), part). The
memoized run is checked equal to a fresh evaluation in the test suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .assemblability import evaluate_assemblability
from .contacts import detect_contacts, support_contacts
from .errors import NoFeasibleSequence, TooManyParts
from .grasping import accessible_for_step
from .stability import evaluate_stability

N_MAX = 8  # permutation guard: the search is O(n!)

STAGE_STABILITY = "stability"
STAGE_GRASP = "graspability"
STAGE_ASSEMBLY = "assemblability"


@dataclass
class EvaluationState:
    """Per-problem caches keyed by (frozenset(placed ids), part id)."""

    problem: object
    memo: bool = True
    _contacts: dict = field(default_factory=dict)
    _stability: dict = field(default_factory=dict)
    _grasp: dict = field(default_factory=dict)
    _assembly: dict = field(default_factory=dict)

    def contacts_for(self, placed, part_id):
        key = (placed, part_id)
        if not self.memo or key not in self._contacts:
            problem = self.problem
            bases = [(pid, problem.world_mesh(pid)) for pid in sorted(placed)]
            cs = detect_contacts(problem.world_mesh(part_id), bases,
                                 include_table=True, object_id=part_id,
                                 delta_c=problem.tolerances.delta_c)
            if not self.memo:
                return cs
            self._contacts[key] = cs
        return self._contacts[key]

    def stability_quality(self, placed, part_id) -> float:
        key = (placed, part_id)
        if not self.memo or key not in self._stability:
            problem = self.problem
            sup = support_contacts(self.contacts_for(placed, part_id),
                                   problem.tolerances.alpha_sup)
            result = evaluate_stability(problem.world_mesh(part_id), sup,
                                        eps_stab=problem.tolerances.eps_stab)
            if not self.memo:
                return result.quality
            self._stability[key] = result.quality
        return self._stability[key]

    def grasp_quality(self, placed, part_id) -> int:
        key = (placed, part_id)
        if not self.memo or key not in self._grasp:
            count = len(accessible_for_step(self.problem, part_id, sorted(placed)))
            if not self.memo:
                return count
            self._grasp[key] = count
        return self._grasp[key]

    def assembly_quality(self, placed, part_id):
        """Returns (quality, direction or None, case value)."""
        key = (placed, part_id)
        if not self.memo or key not in self._assembly:
            direction = evaluate_assemblability(
                part_id, sorted(placed), self.problem,
                contacts=self.contacts_for(placed, part_id))
            value = (direction.quality, direction.n_o, direction.case.value)
            if not self.memo:
                return value
            self._assembly[key] = value
        return self._assembly[key]


@dataclass
class QualityMatrices:
    """Outcome of evaluating every permuted order.

    S, G, A hold the three quality matrices (n! x n); Aprime holds the
    chosen directions (NaN where none). `evaluated` marks cells actually
    computed: cells after a zero, or in a pruned row, stay unevaluated
    and must never be read as literal zeros. m[r] is True iff row r never
    hit a zero.
    """

    P: list
    S: np.ndarray
    G: np.ndarray
    A: np.ndarray
    Aprime: np.ndarray
    m: np.ndarray
    evaluated: np.ndarray
    failures: list = field(default_factory=list)
    cells_evaluated: int = 0
    rows_pruned: int = 0

    def feasible_rows(self):
        return [i for i, ok in enumerate(self.m) if ok]

    def row_score(self, i) -> float:
        if not self.m[i]:
            return 0.0
        return float(self.S[i].min() * self.G[i].min() * self.A[i].min())


def permutations(ids, n_max=N_MAX, force=False):
    """All n! assembly orders, in lexicographic order of the input ids.

    Guarded by `n_max` because the search cost is O(n!); pass force=True
    to exceed it deliberately.
    """
    ids = list(ids)
    if len(ids) < 1:
        raise ValueError("need at least one part id")
    if len(ids) > n_max and not force:
        raise TooManyParts(
            f"{len(ids)} parts would mean {len(ids)}! = "
            f"{math.factorial(len(ids))} orders; evaluation is O(n!). "
            f"Pass force=True to override.")
    return [tuple(row) for row in itertools.permutations(ids)]


def evaluate_all(P, problem, prune=True, state=None) -> QualityMatrices:
    """Fill S, G, A, A' over the permutation matrix with Alg.-1 pruning.

    Rows are visited top to bottom; a zero cell at column j marks every
    row sharing the same (j+1)-prefix infeasible, including rows not yet
    visited. With prune=False each row is evaluated independently
    (still stopping at its own first zero).
    """
    n_rows = len(P)
    n_cols = len(P[0]) if n_rows else 0
    q = QualityMatrices(
        P=list(P),
        S=np.zeros((n_rows, n_cols)),
        G=np.zeros((n_rows, n_cols)),
        A=np.zeros((n_rows, n_cols)),
        Aprime=np.full((n_rows, n_cols, 3), np.nan),
        m=np.ones(n_rows, dtype=bool),
        evaluated=np.zeros((n_rows, n_cols), dtype=bool),
    )
    state = state or EvaluationState(problem)
    seen_failures = set()

    def update(i, j):
        """Mark every row whose (j+1)-prefix matches row i's as infeasible."""
        prefix = P[i][:j + 1]
        for k in range(n_rows):
            if P[k][:j + 1] == prefix:
                q.m[k] = False

    def record(i, j, stage, detail=""):
        prefix = P[i][:j + 1]
        key = (prefix, stage)
        if key not in seen_failures:
            seen_failures.add(key)
            q.failures.append({
                "prefix": list(prefix),
                "part": P[i][j],
                "stage": stage,
                "detail": detail,
            })

    for i in range(n_rows):
        if not q.m[i]:
            if prune:
                q.rows_pruned += 1
                continue
            q.m[i] = True  # exhaustive mode re-evaluates every row
        row = P[i]
        for j in range(n_cols):
            placed = frozenset(row[:j])
            part = row[j]

            s = state.stability_quality(placed, part)
            q.S[i, j] = s
            q.evaluated[i, j] = True
            q.cells_evaluated += 1
            if s == 0.0:
                record(i, j, STAGE_STABILITY, "no support or com outside hull")
                if prune:
                    update(i, j)
                else:
                    q.m[i] = False
                break

            g = state.grasp_quality(placed, part)
            q.G[i, j] = g
            if g == 0:
                record(i, j, STAGE_GRASP, "every grasp collides")
                if prune:
                    update(i, j)
                else:
                    q.m[i] = False
                break

            a, n_o, case = state.assembly_quality(placed, part)
            q.A[i, j] = a
            if n_o is not None:
                q.Aprime[i, j] = n_o
            if a == 0.0:
                record(i, j, STAGE_ASSEMBLY, f"case {case}")
                if prune:
                    update(i, j)
                else:
                    q.m[i] = False
                break
    return q


def select_optimal(q: QualityMatrices):
    """Rows maximizing min(s) * min(g) * min(a), with all ties, by row index.

    Raises NoFeasibleSequence when every row is infeasible; the exception
    carries the recorded failure prefixes.
    """
    feasible = q.feasible_rows()
    if not feasible:
        raise NoFeasibleSequence(
            f"all {len(q.P)} permuted orders are infeasible "
            f"({len(q.failures)} distinct failing prefixes)", q.failures)
    scores = {i: q.row_score(i) for i in feasible}
    best = max(scores.values())
    return [(i, scores[i]) for i in feasible if scores[i] == best]


@dataclass(frozen=True)
class PlanStep:
    part_id: str
    direction: np.ndarray
    s: float
    g: int
    a: float
    grasps: list


@dataclass(frozen=True)
class AssemblyPlan:
    steps: list
    overall: float
    ties: list          # every co-optimal order, including the chosen one
    settings: dict

    @property
    def order(self):
        return [step.part_id for step in self.steps]


def plan(problem, prune=True, n_max=N_MAX, force=False) -> AssemblyPlan:
    """Full pipeline: permute, evaluate with pruning, pick the best order.

    The returned plan carries, per step, the insertion direction and the
    accessible grasps of that step (recomputed for the winning order so
    the plan is self-contained).
    """
    P = permutations(problem.ids(), n_max=n_max, force=force)
    state = EvaluationState(problem)
    q = evaluate_all(P, problem, prune=prune, state=state)
    winners = select_optimal(q)
    row, score = winners[0]
    order = P[row]
    steps = []
    for j, part in enumerate(order):
        grasps = accessible_for_step(problem, part, list(order[:j]))
        steps.append(PlanStep(
            part_id=part,
            direction=q.Aprime[row, j].copy(),
            s=float(q.S[row, j]),
            g=int(q.G[row, j]),
            a=float(q.A[row, j]),
            grasps=grasps))
    return AssemblyPlan(steps=steps, overall=score,
                        ties=[list(P[r]) for r, _ in winners],
                        settings=problem.settings_dict())
