"""
When the fleet is too small
===========================

Four vehicles with 14 kWh each cannot cover 70 kWh of minimum demand. The
solver reports which constraints fail at every price instead of returning
a number.
"""

from mesgame import Lcs, MesAgent, Rcs, Scenario, solve_equilibrium
from mesgame.verify import brute_equilibrium

fleet = tuple(MesAgent(f"k{n}", "R1", "L1" if n < 2 else "L2", 80.0, 66.0) for n in range(4))
scenario = Scenario(
    rcs=(Rcs("R1", 1e4, 90.0),),
    lcs=(Lcs("L1", 30.0, 100.0, 60.0), Lcs("L2", 40.0, 100.0, 60.0)),
    fleet=fleet,
)
res = solve_equilibrium(scenario)
print(res.status)
for name, slack in res.violations.items():
    print(f"  {name}: short by {-slack:.3f} kWh even at full service")
print(f"grid scan finds a feasible price: {brute_equilibrium(scenario).feasible}")

# enough vehicles, but the source station cannot hand over what the sink needs
short = Scenario((Rcs("R1", 20.0, 90.0),), (Lcs("L1", 25.0, 100.0, 60.0), Lcs("L2", 0.0, 100.0, 60.0)), fleet)
res = solve_equilibrium(short)
print(f"\n{res.status}")
low, high = res.violations.items()
print(f"  {low[0]} needs a price of at least {low[1]:.4f}")
print(f"  {high[0]} holds only up to {high[1]:.4f}")
