"""
Solving the reference setting
=============================

Two resourceful stations feed two overloaded ones through 25 vehicles drawn
from the reference distributions. The leader's utility is a concave
quadratic on each interval between consecutive vehicle thresholds, so the
solver walks the intervals and keeps the best feasible vertex or endpoint.
"""

from mesgame import solve_equilibrium, reference_scenario
from mesgame.leader import interval_programs
from mesgame.verify import GridSpec, brute_equilibrium

scenario = reference_scenario(seed=0)
print(f"{scenario.size} vehicles, mean service target {scenario.mean_service_target:.1f} kWh")

programs = interval_programs(scenario)
print(f"\n{len(programs)} price intervals")
print("  #     from        to   quad coef   feasible window")
for prog in programs:
    window = f"[{prog.p_lo:.5f}, {prog.p_hi:.5f}]" if prog.feasible else "-"
    print(f"  {prog.index:<3} {prog.lower:8.5f}  {prog.upper:8.5f}  {prog.quad:10.3f}   {window}")

res = solve_equilibrium(scenario)
print(f"\nequilibrium price {res.p_star:.6f} in interval {res.interval}, operator utility {res.pso_utility:.4f}")
for lid, load in res.lcs_loads.items():
    print(f"  {lid} receives {load:.3f} kWh")
for rid, draw in res.rcs_draws.items():
    print(f"  {rid} gives    {draw:.3f} kWh")

# every vehicle here ends up with a negative payoff; the motivation term
# charges it for staying below the fleet-average target
print(f"vehicles with positive utility: {sum(res.participation)} of {scenario.size}")

oracle = brute_equilibrium(scenario, GridSpec(p_step=1e-5))
print(f"\nprice-grid scan: p = {oracle.p:.5f}, utility {oracle.utility:.4f} "
      f"({oracle.n_feasible} of {oracle.n_points} grid prices feasible)")
