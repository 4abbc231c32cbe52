"""
Three ways to set the price
===========================

The cheapest feasible price, a random feasible price, and the equilibrium
price, compared over 50 seeded fleets of the reference setting.
"""

import numpy as np

from mesgame import solve_equilibrium, reference_scenario
from mesgame.baselines import solve_price_minimized, solve_random

rows = []
for seed in range(50):
    s = reference_scenario(seed)
    res = solve_equilibrium(s)
    if not res.feasible:
        print(f"seed {seed:2d}: infeasible, {', '.join(res.violations)}")
        continue
    rows.append((res.pso_utility, solve_random(s, seed).pso_utility,
                 solve_price_minimized(s).pso_utility))

u = np.array(rows)
print(f"\n{len(u)} feasible fleets")
for name, col in zip(("equilibrium", "random", "cheapest"), u.T):
    print(f"  {name:12s} mean {col.mean():8.3f}   min {col.min():8.3f}   max {col.max():8.3f}")
print(f"equilibrium beats cheapest on every fleet: {bool(np.all(u[:, 0] >= u[:, 2]))}")
