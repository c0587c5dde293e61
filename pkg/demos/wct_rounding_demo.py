"""
Weighted completion time with a profit target
=============================================

A single job of size 1000 with a profit target of 1 shows why the plain
time-indexed LP is weak; the knapsack-cover row fixes it.  Then a random
instance is rounded many times to see how often the target is met.
"""

import numpy as np

from outliersched import lp, oracles, wct
from outliersched.core import WctInstance
from outliersched.generators import random_wct

inst = WctInstance.single(1, [1], [1], [1000], 1)
plain = wct.build_wct_lp(inst, kc=False)
raw = lp.solve(plain.model)
print("without the cover row: y =", raw.x[plain.y_index[0]], "LP value", raw.objective)
strong = wct.solve_relaxation(inst, kc=True)
print("with the cover row:    y =", strong.y[0], "LP value", strong.lp_value)
print("optimum:", oracles.brute_wct(inst).objective)

# Random two-machine instance with release dates.
rng = np.random.default_rng(5)
inst = random_wct(rng, 8, 2, rmax=3)
sol = wct.solve_relaxation(inst)
lengths = wct.marking_lengths(sol)
hits = 0
for t in range(400):
    _, sched = wct.randomized_round(sol, 7, t, lengths)
    hits += wct.meets_targets(inst, sched.selected)
print(f"target met in {hits}/400 independent roundings")

res = wct.solve_wct(inst, seed=7, trials=200)
print("best rounded schedule:", res.report)
print("optimum:", oracles.brute_wct(inst).objective)

# Several profit targets at once need a larger inflation factor.
for K in (1, 2, 4):
    print(f"K={K}: beta = {wct.beta_for(K):.4f}")
