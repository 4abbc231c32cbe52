"""Acceptance criteria. A pass/fail line per criterion is printed at the end of the run."""

import csv
import io
import time

import numpy as np
import pytest

from mesgame.baselines import solve_price_minimized, solve_random
from mesgame.cli import main
from mesgame.follower import best_response, best_response_profile, mes_utility
from mesgame.leader import FEASIBILITY_TOL, interval_programs, solve_equilibrium
from mesgame.model import Lcs, Rcs, Scenario, reference_scenario
from mesgame.sweep import default_spec, run_sweep
from mesgame.verify import GridSpec, brute_best_response, brute_equilibrium, energy_grid

from factories import random_agent, random_scenario, rng, reference_agent

P_I, P_J = 90.0, 60.0


def test_best_response_oracle_equivalence():
    r = rng(1)
    grid = GridSpec(e_step=1e-3)
    start = time.perf_counter()
    for _ in range(1000):
        agent = random_agent(r)
        prof = best_response_profile(agent, P_I, P_J)
        # half the draws inside the interior branch, half anywhere
        if r.random() < 0.5:
            p = float(r.uniform(prof.rejection_price, prof.saturation_price))
        else:
            p = float(r.uniform(0.0, 2.0 * max(prof.saturation_price, 0.1)))
        target = float(r.uniform(0.0, 30.0))
        brute = brute_best_response(agent, p, target, P_I, P_J, grid)
        assert abs(best_response(prof, p) - brute) <= 2 * grid.e_step * agent.capacity + 1e-12
    assert time.perf_counter() - start < 10.0


def _thresholds_from_marginal_utility(agent):
    # dU/de = 2p - t - d1 - 2*d2*e; zero at e = 0 and at e = capacity
    t = agent.time_weight * (1.0 / P_I + 1.0 / P_J)
    d1 = agent.degradation_weight * agent.power_degradation * agent.dod_linear / agent.battery_capacity
    d2 = agent.degradation_weight * agent.power_degradation * agent.dod_quadratic / agent.battery_capacity**2
    return (t + d1) / 2.0, (t + d1 + 2.0 * d2 * agent.capacity) / 2.0


def test_threshold_correctness():
    r = rng(2)
    eps = 1e-6
    grid = GridSpec(e_step=1e-3)
    n = 0
    while n < 1000:
        agent = random_agent(r)
        if agent.capacity <= 0:
            continue
        n += 1
        prof = best_response_profile(agent, P_I, P_J)
        lo, hi = _thresholds_from_marginal_utility(agent)
        assert prof.rejection_price == pytest.approx(lo, rel=1e-9, abs=1e-15)
        assert prof.saturation_price == pytest.approx(hi, rel=1e-9, abs=1e-15)
        target = float(r.uniform(0.0, 30.0))
        e = energy_grid(agent, grid)
        for p, expected in ((prof.rejection_price - eps, 0.0), (prof.saturation_price + eps, agent.capacity)):
            u = np.array([mes_utility(agent, x, p, target, P_I, P_J) for x in e])
            assert e[int(np.argmax(u))] == expected
            assert best_response(prof, p) == expected


def test_equilibrium_oracle_equivalence():
    r = rng(3)
    step = 1e-4
    grid = GridSpec(p_step=step)
    start = time.perf_counter()
    n_feasible = 0
    for _ in range(200):
        s = random_scenario(r, max_agents=8)
        res = solve_equilibrium(s)
        oracle = brute_equilibrium(s, grid)
        if not oracle.feasible:
            # the grid may step over a feasible window narrower than its step
            continue
        assert res.feasible
        n_feasible += 1
        tie = abs(res.pso_utility - oracle.utility) <= 1e-6 * max(1.0, abs(oracle.utility))
        assert res.pso_utility >= oracle.utility - 1e-6
        assert abs(res.p_star - oracle.p) <= 2 * step or tie
    assert n_feasible >= 100
    assert time.perf_counter() - start < 60.0


def test_concavity_certificates():
    r = rng(3)
    scenarios = [random_scenario(r, max_agents=8) for _ in range(200)]
    scenarios += [reference_scenario(seed) for seed in range(50)]
    n = 0
    for s in scenarios:
        for prog in interval_programs(s):
            assert prog.quad <= 0.0
            n += 1
    assert n > 1000
    for _ in range(2000):
        agent = random_agent(r)
        p, target = float(r.uniform(0.0, 3.0)), float(r.uniform(0.0, 30.0))
        x, z = sorted(r.uniform(0.0, agent.capacity, 2))
        u = [mes_utility(agent, e, p, target, P_I, P_J) for e in (x, 0.5 * (x + z), z)]
        assert u[1] >= 0.5 * (u[0] + u[2]) - 1e-9 * (1.0 + max(abs(v) for v in u))


def test_scheme_dominance():
    prop, rand, low = [], [], []
    for seed in range(50):
        s = reference_scenario(seed)
        res = solve_equilibrium(s)
        pm = solve_price_minimized(s)
        assert pm.feasible == res.feasible
        if not res.feasible:
            continue
        assert res.pso_utility >= pm.pso_utility
        rd = solve_random(s, seed)
        assert res.pso_utility >= rd.pso_utility
        prop.append(res.pso_utility)
        rand.append(rd.pso_utility)
        low.append(pm.pso_utility)
    assert len(prop) >= 40
    assert np.mean(prop) - np.mean(rand) > 0
    assert np.mean(rand) - np.mean(low) > 0


def _timed_sweep(parameter):
    start = time.perf_counter()
    series = run_sweep(default_spec(parameter, seeds=range(20), schemes=["proposed"]))
    assert time.perf_counter() - start <= 30.0
    return series


@pytest.mark.parametrize("parameter", ["fleet_size", "loading_weight", "degradation_weight"])
def test_trend_reproduction(parameter):
    series = _timed_sweep(parameter)
    _, price, util = series.means()
    assert np.all(np.isfinite(price))
    if parameter == "fleet_size":
        assert np.all(np.diff(price) <= 0)
        assert np.all(np.diff(util) >= 0)
    elif parameter == "degradation_weight":
        assert np.all(np.diff(price) > 0)
        assert np.all(np.diff(util) < 0)
    else:
        onset = series.saturation_onset()
        assert onset is not None
        values = series.means()[0]
        after = values >= onset
        print(f"\nloading weight: an LCS reaches its demand cap from {onset}")
        assert np.all(np.diff(price[~after]) >= 0)
        assert np.all(np.diff(price[after]) == pytest.approx(0.0, abs=1e-9))
        assert price[after][0] >= price[~after][-1]


def test_determinism(tmp_path, capsys):
    spec = tmp_path / "spec.toml"
    spec.write_text('[sweep]\nparameter = "capacity_mean"\nvalues = [10, 14, 18]\nseeds = 6\n')
    outputs = []
    for n, jobs in enumerate((1, 1, 3)):
        out = tmp_path / f"run{n}.csv"
        assert main(["sweep", str(spec), "--out", str(out), "--jobs", str(jobs)]) == 0
        outputs.append((out.read_bytes(), (tmp_path / f"run{n}_mean.csv").read_bytes()))
    capsys.readouterr()
    assert outputs[0] == outputs[1] == outputs[2]
    rows = list(csv.reader(io.StringIO(outputs[0][0].decode())))
    assert len(rows) == 1 + 3 * 6 * 3


def test_feasibility_honesty():
    agents = [reference_agent(id=f"k{n}", lcs="L1" if n < 2 else "L2") for n in range(4)]
    # 4 agents of 14 kWh each against 30 + 40 kWh of minimum demand
    s = Scenario(rcs=(Rcs("R1", 1e4, 90.0),),
                 lcs=(Lcs("L1", 30.0, 100.0, 60.0), Lcs("L2", 40.0, 100.0, 60.0)),
                 fleet=tuple(agents))
    assert sum(a.capacity for a in s.fleet) < sum(l.demand_min for l in s.lcs)
    res = solve_equilibrium(s)
    assert not res.feasible
    assert set(res.violations) == {"L1.demand_min", "L2.demand_min"}
    assert all(v < -FEASIBILITY_TOL for v in res.violations.values())
    assert not brute_equilibrium(s, GridSpec(p_step=1e-5)).feasible
    assert not solve_price_minimized(s).feasible
