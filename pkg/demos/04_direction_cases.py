"""The nine contact-normal cases and their assembly directions."""

import numpy as np

from asmplan import classify, optimal_direction

X, Y, Z = np.eye(3)

EXAMPLES = {
    "resting on one face":            [-Z],
    "between two parallel walls":     [X, -X],
    "corner seat (two faces)":        [X, Y],
    "slot (pair + floor normal)":     [X, -X, Y],
    "four walls, open above/below":   [X, -X, Y, -Y],
    "three-face corner pocket":       [X, Y, Z],
    "slot with a back wall":          [X, -X, Y, Z],
    "four walls plus a bottom":       [X, -X, Y, -Y, -Z],
    "fully enclosed cavity":          [X, -X, Y, -Y, Z, -Z],
}

print(f"{'situation':32} {'case':6} {'quality':>7}  direction")
for name, normals in EXAMPLES.items():
    label = classify(normals)
    d = optimal_direction(label, normals)
    vec = "none" if d.n_o is None else np.round(d.n_o, 3)
    print(f"{name:32} {label.value:6} {d.quality:7.0f}  {vec}")

print("""
Reading the table: a large quality means the chosen direction has lots of
angular clearance before some contact blocks it; 0 means no translation
can assemble the part at all. The swept-volume check may still reset a
positive quality to 0 when the straight-line approach path is obstructed.""")
