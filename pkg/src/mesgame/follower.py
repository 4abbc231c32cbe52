"""MES (follower) side: utility, costs and the closed-form best response."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MesAgent, Scenario


def service_time_cost(agent: MesAgent, e: float, p_i: float, p_j: float) -> float:
    """Hours spent charging at the RCS plus discharging at the LCS."""
    return e / p_i + e / p_j


def degradation_cost(agent: MesAgent, e: float) -> float:
    dod = e / agent.battery_capacity
    return agent.power_degradation * (agent.dod_quadratic * dod**2 + agent.dod_linear * dod)


def mes_utility(agent: MesAgent, e: float, p: float, mean_target: float, p_i: float,
                p_j: float) -> float:
    """Service reward + motivation reward - weighted time cost - weighted degradation cost."""
    return (
        p * e
        + p * (e - mean_target)
        - agent.time_weight * service_time_cost(agent, e, p_i, p_j)
        - agent.degradation_weight * degradation_cost(agent, e)
    )


@dataclass(frozen=True)
class BestResponseProfile:
    """Piecewise-linear best response of one agent.

    Zero up to ``rejection_price``, ``slope * p - intercept`` in between,
    ``capacity`` from ``saturation_price`` on. ``rejection_price`` may be
    negative, in which case the agent already serves at p = 0.
    """

    mes_id: str
    rejection_price: float
    saturation_price: float
    slope: float
    intercept: float
    capacity: float


def best_response_profile(agent: MesAgent, p_i: float, p_j: float) -> BestResponseProfile:
    curvature = agent.dod_quadratic * agent.degradation_weight * agent.power_degradation
    b = agent.battery_capacity
    p_low = 0.5 * (
        agent.time_weight * (p_i + p_j) / (p_i * p_j)
        + agent.degradation_weight * agent.dod_linear * agent.power_degradation / b
    )
    p_high = p_low + curvature * agent.capacity / b**2
    slope = b**2 / curvature
    return BestResponseProfile(
        mes_id=agent.id,
        rejection_price=p_low,
        saturation_price=p_high,
        slope=slope,
        intercept=slope * p_low,
        capacity=agent.capacity,
    )


def best_response(profile: BestResponseProfile, p: float) -> float:
    if p <= profile.rejection_price:
        return 0.0
    if p >= profile.saturation_price:
        return profile.capacity
    return profile.slope * p - profile.intercept


def participates(agent: MesAgent, profile: BestResponseProfile, p: float, mean_target: float,
                 p_i: float, p_j: float) -> bool:
    """True when the best response earns strictly positive utility."""
    e = best_response(profile, p)
    return mes_utility(agent, e, p, mean_target, p_i, p_j) > 0


# ---------------------------------------------------------------------------
# whole-fleet helpers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FleetProfiles:
    """Best-response profiles of a whole fleet as aligned numpy columns."""

    rejection_price: np.ndarray
    saturation_price: np.ndarray
    slope: np.ndarray
    intercept: np.ndarray
    capacity: np.ndarray

    def __len__(self):
        return len(self.slope)

    def respond(self, p: float) -> np.ndarray:
        """Best responses of every agent at price ``p`` (same branch rules as ``best_response``)."""
        e = self.slope * p - self.intercept
        e = np.where(p <= self.rejection_price, 0.0, e)
        return np.where(p >= self.saturation_price, self.capacity, e)


def fleet_profiles(scenario: Scenario) -> list[BestResponseProfile]:
    return [best_response_profile(a, *scenario.powers(a)) for a in scenario.fleet]


def fleet_profile_arrays(scenario: Scenario) -> FleetProfiles:
    profiles = fleet_profiles(scenario)
    return FleetProfiles(
        rejection_price=np.array([q.rejection_price for q in profiles]),
        saturation_price=np.array([q.saturation_price for q in profiles]),
        slope=np.array([q.slope for q in profiles]),
        intercept=np.array([q.intercept for q in profiles]),
        capacity=np.array([q.capacity for q in profiles]),
    )


def fleet_utilities(scenario: Scenario, e: np.ndarray, p: float) -> np.ndarray:
    return np.array([
        mes_utility(a, float(ek), p, scenario.mean_service_target, *scenario.powers(a))
        for a, ek in zip(scenario.fleet, e)
    ])
