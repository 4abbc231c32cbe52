"""PSO (leader) side: utility, constraints and the breakpoint-interval solve.

Every agent's best response is piecewise linear in the price with kinks at
its rejection and saturation prices. Between two consecutive kinks the
loads are affine in ``p`` and the leader's utility is a concave quadratic,
so each interval is solved in closed form and the global optimum is the
best interval optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .follower import FleetProfiles, fleet_profile_arrays, fleet_utilities
from .model import Scenario

# absolute slack (kWh) when testing demand and surplus constraints
FEASIBILITY_TOL = 1e-6

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"


def station_loads(scenario: Scenario, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Energy delivered to each LCS and drawn from each RCS."""
    arr = scenario.arrays
    e = np.asarray(e, dtype=float)
    lcs = np.bincount(arr.lcs_index, weights=e, minlength=len(scenario.lcs))
    rcs = np.bincount(arr.rcs_index, weights=e, minlength=len(scenario.rcs))
    return lcs, rcs


def pso_utility(scenario: Scenario, p: float, e: np.ndarray) -> float:
    e = np.asarray(e, dtype=float)
    if e.shape != (scenario.size,):
        raise ValueError(f"expected {scenario.size} service amounts, got shape {e.shape}")
    loads, _ = station_loads(scenario, e)
    a = np.array([l.a for l in scenario.lcs])
    b = np.array([l.b for l in scenario.lcs])
    c = np.array([l.c for l in scenario.lcs])
    loading = scenario.loading_weight * float(np.sum(-((a * loads - b) ** 2) + c))
    payment = float(np.sum(p * e + p * (e - scenario.mean_service_target)))
    return loading - payment


def constraint_slacks(scenario: Scenario, e: np.ndarray) -> dict[str, float]:
    """Signed slack of every demand/surplus constraint; negative means violated."""
    loads, draws = station_loads(scenario, e)
    slacks = {}
    for l, x in zip(scenario.lcs, loads):
        slacks[f"{l.id}.demand_min"] = float(x - l.demand_min)
        slacks[f"{l.id}.demand_max"] = float(l.demand_max - x)
    for r, x in zip(scenario.rcs, draws):
        slacks[f"{r.id}.surplus"] = float(r.surplus_energy - x)
    return slacks


def is_feasible(scenario: Scenario, e: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
    return all(s >= -tol for s in constraint_slacks(scenario, e).values())


# ---------------------------------------------------------------------------
# breakpoints and interval programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriceBreakpoints:
    """Sorted kink prices of the aggregate best response.

    ``gamma`` holds all 2K rejection/saturation prices (clamped at 0) in
    ascending order; ``grid`` is the deduplicated sequence whose consecutive
    pairs bound the intervals. With zero total minimum demand ``grid`` also
    starts at 0 so that the free price is a candidate.
    """

    gamma: tuple[float, ...]
    grid: tuple[float, ...]

    @property
    def n_intervals(self) -> int:
        return max(len(self.grid) - 1, 1)

    def interval(self, m: int) -> tuple[float, float]:
        if len(self.grid) == 1:
            if m != 0:
                raise IndexError(m)
            return self.grid[0], self.grid[0]
        return self.grid[m], self.grid[m + 1]


def build_breakpoints(scenario: Scenario, profiles: FleetProfiles | None = None) -> PriceBreakpoints:
    if profiles is None:
        profiles = fleet_profile_arrays(scenario)
    values = np.concatenate([profiles.rejection_price, profiles.saturation_price])
    gamma = np.sort(np.maximum(values, 0.0), kind="stable")
    grid = list(np.unique(gamma))
    if grid[0] > 0 and all(l.demand_min == 0 for l in scenario.lcs):
        grid.insert(0, 0.0)
    return PriceBreakpoints(gamma=tuple(float(g) for g in gamma),
                            grid=tuple(float(g) for g in grid))


@dataclass(frozen=True)
class IntervalProgram:
    """Leader problem restricted to one price interval.

    On the interval each agent's response is ``unit_slope * p + unit_offset``;
    ``interior`` and ``saturated`` index the agents on the linear and capped
    branches. Utility is ``quad * p**2 + lin * p + const``. ``p_lo``/``p_hi``
    bound the prices that also meet every station constraint; ``p_lo > p_hi``
    means none do.
    """

    index: int
    lower: float
    upper: float
    interior: tuple[int, ...]
    saturated: tuple[int, ...]
    unit_slope: np.ndarray = field(repr=False)
    unit_offset: np.ndarray = field(repr=False)
    quad: float = 0.0
    lin: float = 0.0
    const: float = 0.0
    p_lo: float = 0.0
    p_hi: float = 0.0
    binding: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.p_lo <= self.p_hi

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper

    def value(self, p: float) -> float:
        return (self.quad * p + self.lin) * p + self.const


def _classify(profiles: FleetProfiles, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Masks of agents on the interior and saturated branches at price ``p``."""
    saturated = p >= profiles.saturation_price
    interior = (p > profiles.rejection_price) & ~saturated
    return interior, saturated


def _linear_bounds(slope: np.ndarray, offset: np.ndarray, lo_energy: np.ndarray,
                   hi_energy: np.ndarray, names: list[str], p_lo: float, p_hi: float,
                   tol: float) -> tuple[float, float, list[str]]:
    """Intersect [p_lo, p_hi] with lo_energy - tol <= slope*p + offset <= hi_energy + tol."""
    binding = []
    for s, v, lo, hi, name in zip(slope, offset, lo_energy, hi_energy, names):
        if s > 0:
            if np.isfinite(lo):
                bound = (lo - tol - v) / s
                if bound > p_lo:
                    p_lo = bound
                    binding.append(f"{name}>=")
            if np.isfinite(hi):
                bound = (hi + tol - v) / s
                if bound < p_hi:
                    p_hi = bound
                    binding.append(f"{name}<=")
        else:
            if v < lo - tol or v > hi + tol:
                return p_lo, -np.inf, binding + [name]
    return p_lo, p_hi, binding


def build_interval_program(scenario: Scenario, breakpoints: PriceBreakpoints, m: int,
                           profiles: FleetProfiles | None = None,
                           tol: float = FEASIBILITY_TOL) -> IntervalProgram:
    """Expand the leader utility on interval ``m`` (0-based) into a quadratic in p."""
    if profiles is None:
        profiles = fleet_profile_arrays(scenario)
    lower, upper = breakpoints.interval(m)
    interior, saturated = _classify(profiles, 0.5 * (lower + upper))

    slope = np.where(interior, profiles.slope, 0.0)
    offset = np.where(interior, -profiles.intercept, np.where(saturated, profiles.capacity, 0.0))

    arr = scenario.arrays
    n_lcs, n_rcs = len(scenario.lcs), len(scenario.rcs)
    lcs_slope = np.bincount(arr.lcs_index, weights=slope, minlength=n_lcs)
    lcs_offset = np.bincount(arr.lcs_index, weights=offset, minlength=n_lcs)
    rcs_slope = np.bincount(arr.rcs_index, weights=slope, minlength=n_rcs)
    rcs_offset = np.bincount(arr.rcs_index, weights=offset, minlength=n_rcs)

    a = np.array([l.a for l in scenario.lcs])
    b = np.array([l.b for l in scenario.lcs])
    c = np.array([l.c for l in scenario.lcs])
    w = scenario.loading_weight
    # loading term: -(a*(S p + V) - b)^2 + c ; payment: 2 p (U p + W) - K ebar p
    gap = a * lcs_offset - b
    total_slope = float(slope.sum())
    total_offset = float(offset.sum())
    fixed_pay = scenario.size * scenario.mean_service_target
    quad = -w * float(np.sum((a * lcs_slope) ** 2)) - 2.0 * total_slope
    lin = -2.0 * w * float(np.sum(a * lcs_slope * gap)) - 2.0 * total_offset + fixed_pay
    const = w * float(np.sum(-(gap**2) + c))

    # half the slack goes to the price bounds so rounding stays inside the full slack
    tol = 0.5 * tol
    p_lo, p_hi, binding = _linear_bounds(
        lcs_slope, lcs_offset,
        np.array([l.demand_min for l in scenario.lcs]),
        np.array([l.demand_max for l in scenario.lcs]),
        [l.id for l in scenario.lcs], lower, upper, tol,
    )
    if p_lo <= p_hi:
        p_lo, p_hi, more = _linear_bounds(
            rcs_slope, rcs_offset,
            np.full(n_rcs, -np.inf),
            np.array([r.surplus_energy for r in scenario.rcs]),
            [r.id for r in scenario.rcs], p_lo, p_hi, tol,
        )
        binding += more

    return IntervalProgram(
        index=m, lower=lower, upper=upper,
        interior=tuple(int(k) for k in np.flatnonzero(interior)),
        saturated=tuple(int(k) for k in np.flatnonzero(saturated)),
        unit_slope=slope, unit_offset=offset,
        quad=quad, lin=lin, const=const,
        p_lo=float(p_lo), p_hi=float(p_hi), binding=tuple(binding),
    )


def solve_interval(program: IntervalProgram) -> tuple[float, float] | None:
    """Closed-form maximizer of the interval quadratic over [p_lo, p_hi]; None if empty."""
    if not program.feasible:
        return None
    lo, hi = program.p_lo, program.p_hi
    if program.quad < 0:
        p = min(max(-program.lin / (2.0 * program.quad), lo), hi)
    elif program.lin > 0:
        p = hi
    else:
        p = lo
    return p, program.value(p)


# ---------------------------------------------------------------------------
# equilibrium
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumResult:
    status: str
    p_star: float | None
    e_star: tuple[float, ...]
    pso_utility: float | None
    mes_utilities: tuple[float, ...]
    lcs_loads: dict[str, float]
    rcs_draws: dict[str, float]
    participation: tuple[bool, ...]
    interval: int | None
    n_intervals: int
    violations: dict[str, float] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def at_demand_max(self, scenario: Scenario, tol: float = 1e-6) -> list[str]:
        """LCS ids whose delivered load sits at the top of their demand window."""
        return [l.id for l in scenario.lcs
                if self.feasible and self.lcs_loads[l.id] >= l.demand_max - tol]


def diagnose_infeasibility(scenario: Scenario) -> dict[str, float]:
    """Explain an empty feasible price set.

    Returns the constraints that fail at every price mapped to their best
    attainable slack (negative). If each constraint can be met on its own,
    returns the conflicting pair instead: the lower bound mapped to the lowest
    breakpoint price meeting it, and the upper bound mapped to the highest
    breakpoint price it allows.
    Loads are nondecreasing in price, so lower bounds are easiest at the top
    of the range and upper bounds at p = 0.
    """
    profiles = fleet_profile_arrays(scenario)
    breakpoints = build_breakpoints(scenario, profiles)
    top = constraint_slacks(scenario, profiles.respond(breakpoints.grid[-1]))
    bottom = constraint_slacks(scenario, profiles.respond(0.0))
    hopeless = {}
    for name in top:
        best = top[name] if name.endswith("demand_min") else bottom[name]
        if best < -FEASIBILITY_TOL:
            hopeless[name] = best
    if hopeless:
        return hopeless
    # every constraint is satisfiable alone: report the pair that closes the window
    need = {}   # lowest price meeting each lower bound
    allow = {}  # highest price respecting each upper bound
    grid = np.unique(np.concatenate([breakpoints.grid, [0.0]]))
    for p in grid:
        for name, s in constraint_slacks(scenario, profiles.respond(p)).items():
            if name.endswith("demand_min"):
                if s >= -FEASIBILITY_TOL and name not in need:
                    need[name] = float(p)
            elif s >= -FEASIBILITY_TOL:
                allow[name] = float(p)
    worst_low = max(need, key=need.get)
    worst_high = min(allow, key=allow.get)
    return {worst_low: need[worst_low], worst_high: allow[worst_high]}


def _result(scenario: Scenario, profiles: FleetProfiles, p: float, interval: int | None,
            n_intervals: int) -> EquilibriumResult:
    e = profiles.respond(p)
    loads, draws = station_loads(scenario, e)
    utilities = fleet_utilities(scenario, e, p)
    return EquilibriumResult(
        status=FEASIBLE,
        p_star=float(p),
        e_star=tuple(float(x) for x in e),
        pso_utility=pso_utility(scenario, p, e),
        mes_utilities=tuple(float(u) for u in utilities),
        lcs_loads={l.id: float(x) for l, x in zip(scenario.lcs, loads)},
        rcs_draws={r.id: float(x) for r, x in zip(scenario.rcs, draws)},
        participation=tuple(bool(u > 0) for u in utilities),
        interval=interval,
        n_intervals=n_intervals,
    )


def interval_programs(scenario: Scenario, profiles: FleetProfiles | None = None,
                      breakpoints: PriceBreakpoints | None = None) -> list[IntervalProgram]:
    if profiles is None:
        profiles = fleet_profile_arrays(scenario)
    if breakpoints is None:
        breakpoints = build_breakpoints(scenario, profiles)
    return [build_interval_program(scenario, breakpoints, m, profiles)
            for m in range(breakpoints.n_intervals)]


def solve_equilibrium(scenario: Scenario) -> EquilibriumResult:
    """Stackelberg equilibrium price and the fleet's responses to it.

    Candidates from all intervals are ranked by the exact leader utility at
    the agents' responses; equal utilities go to the lower price.
    """
    profiles = fleet_profile_arrays(scenario)
    breakpoints = build_breakpoints(scenario, profiles)
    programs = interval_programs(scenario, profiles, breakpoints)
    best = None
    for prog in programs:
        sol = solve_interval(prog)
        if sol is None:
            continue
        p = sol[0]
        value = pso_utility(scenario, p, profiles.respond(p))
        key = (-value, p)
        if best is None or key < best[0]:
            best = (key, p, prog.index)
    if best is None:
        return EquilibriumResult(
            status=INFEASIBLE, p_star=None, e_star=(), pso_utility=None, mes_utilities=(),
            lcs_loads={}, rcs_draws={}, participation=(), interval=None,
            n_intervals=len(programs),
            violations=diagnose_infeasibility(scenario),
        )
    return _result(scenario, profiles, best[1], best[2], len(programs))


def evaluate_price(scenario: Scenario, p: float) -> EquilibriumResult:
    """Outcome of posting price ``p``: the fleet's responses, utilities and loads."""
    profiles = fleet_profile_arrays(scenario)
    res = _result(scenario, profiles, p, None, 0)
    e = np.array(res.e_star)
    if is_feasible(scenario, e):
        return res
    bad = {k: v for k, v in constraint_slacks(scenario, e).items() if v < -FEASIBILITY_TOL}
    return replace(res, status=INFEASIBLE, violations=bad)


__all__ = [
    "EquilibriumResult", "IntervalProgram", "PriceBreakpoints", "FEASIBILITY_TOL",
    "build_breakpoints", "build_interval_program", "constraint_slacks", "diagnose_infeasibility", "evaluate_price",
    "interval_programs", "is_feasible", "pso_utility", "solve_equilibrium", "solve_interval",
    "station_loads",
]
