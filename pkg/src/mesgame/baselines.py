"""Comparison pricing schemes: the cheapest feasible price and a random feasible price."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .follower import fleet_profile_arrays
from .leader import (
    FEASIBLE,
    INFEASIBLE,
    build_breakpoints,
    build_interval_program,
    diagnose_infeasibility,
    is_feasible,
    pso_utility,
)
from .model import Scenario

PRICE_MINIMIZED = "price_minimized"
RANDOM = "random"
MAX_RANDOM_ATTEMPTS = 10_000


@dataclass(frozen=True)
class BaselineResult:
    scheme: str
    status: str
    p: float | None
    e: tuple[float, ...]
    pso_utility: float | None
    seed: int | None = None
    attempts: int | None = None
    violations: dict | None = None

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def _feasible_result(scenario, scheme, p, e, **extra) -> BaselineResult:
    return BaselineResult(scheme=scheme, status=FEASIBLE, p=float(p),
                          e=tuple(float(x) for x in e),
                          pso_utility=pso_utility(scenario, p, e), **extra)


def solve_price_minimized(scenario: Scenario) -> BaselineResult:
    """Lowest price at which every station constraint holds.

    Loads are piecewise linear and nondecreasing in price, so the first
    interval (in ascending order) with a nonempty feasible window yields the
    answer at that window's lower end.
    """
    profiles = fleet_profile_arrays(scenario)
    e0 = profiles.respond(0.0)
    if is_feasible(scenario, e0):
        return _feasible_result(scenario, PRICE_MINIMIZED, 0.0, e0)
    breakpoints = build_breakpoints(scenario, profiles)
    for m in range(breakpoints.n_intervals):
        prog = build_interval_program(scenario, breakpoints, m, profiles)
        if prog.feasible:
            p = prog.p_lo
            return _feasible_result(scenario, PRICE_MINIMIZED, p, profiles.respond(p))
    return BaselineResult(scheme=PRICE_MINIMIZED, status=INFEASIBLE, p=None, e=(),
                          pso_utility=None, violations=diagnose_infeasibility(scenario))


def solve_random(scenario: Scenario, seed: int) -> BaselineResult:
    """Rejection-sample a uniform price over the breakpoint range until it is feasible."""
    profiles = fleet_profile_arrays(scenario)
    breakpoints = build_breakpoints(scenario, profiles)
    lo = max(0.0, min(breakpoints.gamma))
    hi = max(breakpoints.gamma)
    rng = np.random.default_rng(seed)
    for attempt in range(1, MAX_RANDOM_ATTEMPTS + 1):
        p = float(rng.uniform(lo, hi))
        e = profiles.respond(p)
        if is_feasible(scenario, e):
            return _feasible_result(scenario, RANDOM, p, e, seed=seed, attempts=attempt)
    return BaselineResult(scheme=RANDOM, status=INFEASIBLE, p=None, e=(), pso_utility=None,
                          seed=seed, attempts=MAX_RANDOM_ATTEMPTS,
                          violations=diagnose_infeasibility(scenario))
