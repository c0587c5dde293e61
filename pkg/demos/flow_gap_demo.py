"""
Flow time with outliers on one machine
======================================

Run the LP rounding pipeline on a random instance and read its certificate,
then build the instance family on which the LP is far below the optimum.
"""

import numpy as np

from outliersched import flow, oracles
from outliersched.generators import random_flow

rng = np.random.default_rng(8)
inst = random_flow(rng, 7, pmax=8, rmax=10)
res = flow.solve_flow_outliers(inst)
cert = res.certificate
print(f"{inst.n} jobs, must finish {inst.profit_target}")
for name, ok in cert.checks.items():
    print(f"  {name:22s} {'ok' if ok else 'FAILED'}")
print("LP flow", float(cert.flow_star), "output flow", float(cert.srpt_flow),
      "optimum", float(oracles.brute_flow(inst).objective))

# The gap family: the LP can split the large jobs, an integral schedule cannot.
for k in (2, 4, 6):
    g = flow.gen_gap_instance(k)
    lp = flow.solve_flow_lp(g.instance)
    opt = oracles.brute_flow(g.instance, fixed=g.small_jobs).objective
    print(f"k={k}: n={g.instance.n}, LP {lp.lp_value:.2f}, Opt {opt}, ratio {float(opt) / lp.lp_value:.2f}")
