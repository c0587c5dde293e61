"""
Exact DP and the FPTAS
======================

With identical machines, unit weights and no release dates the problem is a
knapsack over processing times.  Compare the exact table with its scaled
version.
"""

import numpy as np

from outliersched import dp, oracles
from outliersched.generators import random_wct

rng = np.random.default_rng(3)
inst = random_wct(rng, 10, 1, pmax=150, unit_weights=True, identical=True)
exact = dp.dp_exact(inst)
print("exact value", exact.value, "selected", sorted(exact.selected), "cells", exact.table_cells)
print("brute force", oracles.brute_wct(inst).objective)

for eps in (1.0, 0.5, 0.1):
    f = dp.fptas(inst, eps)
    print(f"eps={eps}: value {f.value} (ratio {f.value / exact.value:.3f}), K={f.K:.4f}, cells {f.table_cells}")

inst2 = random_wct(rng, 8, 2, pmax=10, unit_weights=True, identical=True)
two = dp.dp_multi_machine(inst2)
print("two machines:", two.value, [list(o) for o in two.orders])
