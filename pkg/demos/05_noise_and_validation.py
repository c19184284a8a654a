"""Validating raw pairwise data and working at a noise tolerance.

The four-point check is the classic realisability filter for distance
data: among the three pair-sum pairings of any four leaves, the two
largest must agree.  With noisy measurements, the star-condition spread
is compared against an explicit epsilon instead of zero.
"""

import random

from treeweights import (
    DoubleWeights,
    buneman_check,
    cherry_scan,
    doubles_of_tree,
    metric_warnings,
    random_tree,
)

data = doubles_of_tree(random_tree(10, seed=21))
print("clean tree data passes the four-point check:", buneman_check(data).passed)

vals = dict(data.items())
vals[(2, 7)] = vals[(2, 7)] + 3
verdict = buneman_check(DoubleWeights(vals))
print("corrupted data witness quadruple:", verdict.witness, "gap:", verdict.gap)

odd = DoubleWeights({(1, 2): -1, (1, 3): 1, (2, 3): 10})
print("metric warnings on odd data:")
for warning in metric_warnings(odd):
    print("  -", warning)

# Noisy quartets: uniform noise of magnitude delta on every distance
# shifts each column-difference spread by at most 4*delta, while a
# non-cherry pair's spread stays near twice the inner edge.  With an
# inner edge of at least 10*delta, eps = 4*delta separates them cleanly.
rng = random.Random(0)
delta = 0.05
eps = 4 * delta
hits = 0
trials = 200
for _ in range(trials):
    twigs = [rng.uniform(1, 10) for _ in range(4)]
    inner = rng.uniform(10 * delta, 20 * delta)
    exact = {
        (1, 2): twigs[0] + twigs[1],
        (3, 4): twigs[2] + twigs[3],
        (1, 3): twigs[0] + inner + twigs[2],
        (1, 4): twigs[0] + inner + twigs[3],
        (2, 3): twigs[1] + inner + twigs[2],
        (2, 4): twigs[1] + inner + twigs[3],
    }
    noisy = {k: v + rng.uniform(-delta, delta) for k, v in exact.items()}
    if cherry_scan(DoubleWeights(noisy), eps=eps).pairs == [(1, 2), (3, 4)]:
        hits += 1
print(f"\nnoisy quartet cherry recovery: {hits}/{trials} at eps = 4*delta")
