"""Full pipeline on the three-block puzzle: matrices, pruning, and the plan."""

import numpy as np

from asmplan import evaluate_all, make_scene, permutations, plan, select_optimal

problem = make_scene("soma3")
P = permutations(problem.ids())
print(f"{len(problem.ids())} parts -> {len(P)} permuted orders\n")

q = evaluate_all(P, problem)
print(f"{'order':22} {'stability':>22} {'grasps':>14} {'assemblability':>17}")
for i, row in enumerate(P):
    if q.m[i]:
        s = np.round(q.S[i], 2)
        print(f"{'<-'.join(row):22} {str(s):>22} {str(q.G[i].astype(int)):>14} "
              f"{str(q.A[i].astype(int)):>17}")
    else:
        done = int(q.evaluated[i].sum())
        print(f"{'<-'.join(row):22} pruned after {done} cell(s)")

print(f"\ncells evaluated: {q.cells_evaluated} of {len(P) * len(P[0])}, "
      f"rows skipped outright: {q.rows_pruned}")

winners = select_optimal(q)
print("co-optimal rows:", [("<-".join(P[r]), round(s, 1)) for r, s in winners])

result = plan(problem)
print(f"\nbest order: {' -> '.join(result.order)}  "
      f"(score {result.overall:.1f})")
for step in result.steps:
    print(f"  {step.part_id:4} insert along {np.round(step.direction, 2)}, "
          f"stability {step.s:.2f}, {step.g} accessible grasps, "
          f"assemblability {step.a:.0f}")
