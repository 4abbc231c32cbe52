"""Stackelberg pricing of on-road mobile energy storage for charging-station overload."""

from .model import (
    DegradationCurve,
    FleetSpec,
    Lcs,
    MesAgent,
    Rcs,
    Scenario,
    ScenarioError,
    dump_scenario,
    generate_fleet,
    load_scenario,
    power_degradation_factor,
    save_scenario,
    reference_scenario,
)
from .follower import (
    BestResponseProfile,
    best_response,
    best_response_profile,
    degradation_cost,
    mes_utility,
    participates,
    service_time_cost,
)
from .leader import (
    EquilibriumResult,
    PriceBreakpoints,
    build_breakpoints,
    build_interval_program,
    pso_utility,
    solve_equilibrium,
    solve_interval,
)

__version__ = "0.1.0"

__all__ = [
    "BestResponseProfile", "DegradationCurve", "EquilibriumResult", "FleetSpec", "Lcs", "MesAgent",
    "PriceBreakpoints", "Rcs", "Scenario", "ScenarioError", "best_response", "best_response_profile",
    "build_breakpoints", "build_interval_program", "degradation_cost", "dump_scenario",
    "generate_fleet", "load_scenario", "mes_utility", "participates", "power_degradation_factor",
    "pso_utility", "save_scenario", "service_time_cost", "solve_equilibrium", "solve_interval",
    "reference_scenario",
]
