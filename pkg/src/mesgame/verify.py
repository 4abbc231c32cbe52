"""Brute-force reference solvers.

These deliberately avoid the breakpoint machinery: the follower oracle
maximizes the utility over an energy grid, and the leader oracle scans a
price grid, recomputing every agent's response from the first-order
condition projected onto its feasible range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .leader import FEASIBILITY_TOL
from .model import MesAgent, Scenario


@dataclass(frozen=True)
class GridSpec:
    e_step: float = 1e-3   # fraction of the agent's capacity
    p_step: float = 1e-4   # absolute price step
    tol: float = FEASIBILITY_TOL

    def __post_init__(self):
        if not (self.e_step > 0 and self.p_step > 0 and self.tol >= 0):
            raise ValueError("grid steps must be positive")


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    p: float | None
    utility: float | None
    n_points: int
    n_feasible: int


def utility_on_grid(agent: MesAgent, e: np.ndarray, p: float, mean_target: float, p_i: float,
                    p_j: float) -> np.ndarray:
    """Follower utility written out term by term, vectorized over ``e``."""
    service = p * e
    motivation = p * (e - mean_target)
    hours = e / p_i + e / p_j
    dod = e / agent.battery_capacity
    wear = agent.power_degradation * (agent.dod_quadratic * dod * dod + agent.dod_linear * dod)
    return service + motivation - agent.time_weight * hours - agent.degradation_weight * wear


def energy_grid(agent: MesAgent, grid: GridSpec) -> np.ndarray:
    n = int(round(1.0 / grid.e_step))
    return np.linspace(0.0, agent.capacity, n + 1)


def brute_best_response(agent: MesAgent, p: float, mean_target: float, p_i: float, p_j: float,
                        grid: GridSpec = GridSpec()) -> float:
    e = energy_grid(agent, grid)
    u = utility_on_grid(agent, e, p, mean_target, p_i, p_j)
    return float(e[int(np.argmax(u))])


def projected_responses(scenario: Scenario, prices: np.ndarray) -> np.ndarray:
    """Responses for each price (rows) and agent (columns).

    Setting dU/de = 2p - t - d1 - 2*d2*e to zero and clipping to [0, capacity]
    gives the maximizer of the concave one-dimensional utility.
    """
    arr = scenario.arrays
    t = arr.time_weight * (1.0 / arr.rcs_power + 1.0 / arr.lcs_power)
    d1 = arr.degradation_weight * arr.power_degradation * arr.dod_linear / arr.battery
    d2 = arr.degradation_weight * arr.power_degradation * arr.dod_quadratic / arr.battery**2
    prices = np.asarray(prices, dtype=float)[:, None]
    free = (2.0 * prices - t - d1) / (2.0 * d2)
    return np.clip(free, 0.0, arr.capacity)


def leader_utility_grid(scenario: Scenario, prices: np.ndarray, e: np.ndarray) -> np.ndarray:
    arr = scenario.arrays
    n_lcs = len(scenario.lcs)
    onehot = np.zeros((scenario.size, n_lcs))
    onehot[np.arange(scenario.size), arr.lcs_index] = 1.0
    loads = e @ onehot
    revenue = np.zeros(len(prices))
    for j, l in enumerate(scenario.lcs):
        revenue += -((l.a * loads[:, j] - l.b) ** 2) + l.c
    paid = prices * e.sum(axis=1)
    motivation = prices * (e - scenario.mean_service_target).sum(axis=1)
    return scenario.loading_weight * revenue - paid - motivation


def feasible_mask(scenario: Scenario, e: np.ndarray, tol: float) -> np.ndarray:
    arr = scenario.arrays
    ok = np.ones(e.shape[0], dtype=bool)
    for j, l in enumerate(scenario.lcs):
        load = e[:, arr.lcs_index == j].sum(axis=1)
        ok &= (load >= l.demand_min - tol) & (load <= l.demand_max + tol)
    for i, r in enumerate(scenario.rcs):
        ok &= e[:, arr.rcs_index == i].sum(axis=1) <= r.surplus_energy + tol
    return ok


def price_ceiling(scenario: Scenario) -> float:
    """Price at which every agent is saturated: the top of the useful range."""
    arr = scenario.arrays
    t = arr.time_weight * (1.0 / arr.rcs_power + 1.0 / arr.lcs_power)
    d1 = arr.degradation_weight * arr.power_degradation * arr.dod_linear / arr.battery
    d2 = arr.degradation_weight * arr.power_degradation * arr.dod_quadratic / arr.battery**2
    return float(max(0.0, np.max(0.5 * (t + d1) + d2 * arr.capacity)))


def price_grid(scenario: Scenario, grid: GridSpec = GridSpec()) -> np.ndarray:
    top = price_ceiling(scenario)
    n = int(np.ceil(top / grid.p_step))
    return np.linspace(0.0, top, n + 1)


def brute_equilibrium(scenario: Scenario, grid: GridSpec = GridSpec()) -> OracleResult:
    """Scan the price grid on [0, max saturation price] for the best feasible price."""
    prices = price_grid(scenario, grid)
    e = projected_responses(scenario, prices)
    u = leader_utility_grid(scenario, prices, e)
    ok = feasible_mask(scenario, e, grid.tol)
    if not ok.any():
        return OracleResult(False, None, None, len(prices), 0)
    u_ok = np.where(ok, u, -np.inf)
    k = int(np.argmax(u_ok))  # first maximum, i.e. lowest price on ties
    return OracleResult(True, float(prices[k]), float(u[k]), len(prices), int(ok.sum()))


def brute_min_price(scenario: Scenario, grid: GridSpec = GridSpec()) -> float | None:
    """Smallest feasible price on the grid."""
    prices = price_grid(scenario, grid)
    ok = feasible_mask(scenario, projected_responses(scenario, prices), grid.tol)
    return float(prices[np.argmax(ok)]) if ok.any() else None
