"""
Assignment with outliers
========================

Assign jobs to unrelated machines so the collected profit reaches a target,
the assignment cost stays near a budget, and no machine is overloaded.
"""

import numpy as np

from outliersched import gap, oracles
from outliersched.generators import random_gap

rng = np.random.default_rng(1)
inst = random_gap(rng, n=7, m=3)
print(f"{inst.n} jobs, {inst.machines} machines, profit target {inst.profit_target}")

# Every Pareto-optimal (cost, makespan) pair the brute-force oracle can reach.
front = oracles.gap_frontier(inst)
print("exact frontier:", front)

# Pick a middle point and ask for a schedule within (1+eps)C and 3T.
C, T = front[len(front) // 2]
eps = 0.5
res = gap.solve_gap_outliers(inst, eps, C, T)
rep = res.report(inst, eps, C, T)
print(f"budget C={C}, T={T}")
print(f"rounded: cost {res.cost} (limit {(1 + eps) * C}), makespan {res.makespan} (limit {3 * T}), "
      f"profit {res.profit}")
print("guesses tried:", rep["guesses_tried"])

# A sweep walks the budgets upward until the LP first admits a solution.
for row in gap.gap_sweep(inst, eps)[:5]:
    print(row)
