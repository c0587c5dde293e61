"""
Brute-force oracles
===================

The small exact solvers used by the test suite, run directly.
"""

import numpy as np

from outliersched import oracles
from outliersched.generators import random_flow, random_gap, random_wct

rng = np.random.default_rng(0)

f = random_flow(rng, 5)
print("SRPT on all jobs:", oracles.srpt(f).objective)
best = oracles.brute_flow(f)
print("best subset:", best.to_dict())

w = random_wct(rng, 6, 2, rmax=2)
print("weighted completion:", oracles.brute_wct(w).to_dict())

g = random_gap(rng, 5, 2)
print("assignment:", oracles.brute_gap(g).to_dict())
