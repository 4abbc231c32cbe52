"""
One vehicle, one price
======================

A single storage vehicle on the R1 -> L1 route with 14 kWh to spare. Below
its rejection price it stays home, above its saturation price it empties
the spare capacity, and in between the delivered energy grows linearly.
"""

import numpy as np

from mesgame import MesAgent, best_response, best_response_profile, mes_utility
from mesgame.verify import GridSpec, brute_best_response

agent = MesAgent("k", "R1", "L1", battery_capacity=80.0, initial_soc=66.0)
prof = best_response_profile(agent, 90.0, 60.0)
print(f"rejection price  {prof.rejection_price:.8f}")
print(f"saturation price {prof.saturation_price:.8f}")
print(f"slope            {prof.slope:.4f} kWh per unit price")

# closed form next to a plain scan of the utility over 1001 energy levels
print("\n   price   closed form   grid argmax   utility")
for p in np.linspace(0.30, 0.50, 9):
    e = best_response(prof, p)
    grid = brute_best_response(agent, p, 10.0, 90.0, 60.0, GridSpec(e_step=1e-3))
    u = mes_utility(agent, e, p, 10.0, 90.0, 60.0)
    print(f"  {p:.3f}   {e:11.4f}   {grid:11.4f}   {u:8.3f}")

# a heavier wear penalty pushes both thresholds up
for w in (5e4, 1e5, 2e5):
    other = MesAgent("k", "R1", "L1", 80.0, 66.0, degradation_weight=w)
    pr = best_response_profile(other, 90.0, 60.0)
    print(f"degradation weight {w:8.0f}: serves from {pr.rejection_price:.4f}, saturates at {pr.saturation_price:.4f}")
