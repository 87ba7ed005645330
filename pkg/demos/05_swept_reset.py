"""Swept-path veto: a geometrically fine direction can still be unreachable."""

import numpy as np

from asmplan import evaluate_assemblability
from asmplan.fixtures import handle_hole_problem

# A block drops into a through-hole in a slab. With an arch (handle) over
# the hole, the only feasible direction (straight down) sweeps through the
# handle on its way in, so its quality resets to zero.
blocked = evaluate_assemblability("block", ["base"], handle_hole_problem(True))
print(f"with handle:    case {blocked.case.value}, quality {blocked.quality}"
      f" (direction vetoed by the swept check)")

open_path = evaluate_assemblability("block", ["base"], handle_hole_problem(False))
print(f"without handle: case {open_path.case.value}, quality {open_path.quality},"
      f" direction {np.round(open_path.n_o, 3)}")

# The planner routes around the blockage: place the block first, then
# lower the slab-with-handle over it.
from asmplan import plan
result = plan(handle_hole_problem(True))
print("planned order with the handle present:", result.order)
for step in result.steps:
    print(f"  place {step.part_id:6} along {np.round(step.direction, 3)} "
          f"(s={step.s:.2f}, g={step.g}, a={step.a:.0f})")
