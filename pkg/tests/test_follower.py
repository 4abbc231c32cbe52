import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesgame.follower import (
    best_response,
    best_response_profile,
    degradation_cost,
    mes_utility,
    participates,
    service_time_cost,
)
from mesgame.verify import GridSpec, brute_best_response, energy_grid, utility_on_grid

from factories import random_agent, reference_agent

P_I, P_J = 90.0, 60.0


def test_service_time_cost():
    agent = reference_agent()
    assert service_time_cost(agent, 0.0, P_I, P_J) == 0.0
    assert service_time_cost(agent, 90.0, P_I, P_J) == pytest.approx(2.5)
    assert service_time_cost(agent, 14.0, 14.0, 14.0) == 2.0


def test_degradation_cost():
    assert degradation_cost(reference_agent(), 0.0) == 0.0
    full = reference_agent(initial_soc=0.0)
    # 5.08e-4 * (1 - 0.222)
    assert degradation_cost(full, 80.0) == pytest.approx(3.95224e-4, rel=1e-12)
    half = reference_agent(dod_linear=0.0)
    assert degradation_cost(half, 40.0) == pytest.approx(5.08e-4 / 4, rel=1e-12)


def test_mes_utility_zero_service():
    agent = reference_agent()
    assert mes_utility(agent, 0.0, 0.7, 10.0, P_I, P_J) == pytest.approx(-7.0)
    assert mes_utility(agent, 0.0, 0.0, 0.0, P_I, P_J) == 0.0


def test_mes_utility_term_by_term():
    agent = reference_agent()
    p, e, target = 0.5, 14.0, 10.0
    reward = p * e
    motivation = p * (e - target)
    time_cost = 30.0 * (e / 90.0 + e / 60.0)
    wear = 1e5 * 5.08e-4 * ((e / 80.0) ** 2 - 0.222 * e / 80.0)
    expected = reward + motivation - time_cost - wear
    assert mes_utility(agent, e, p, target, P_I, P_J) == pytest.approx(expected, rel=1e-12)
    # 7 + 2 - 11.6666... - 50.8 * (0.030625 - 0.03885)
    assert expected == pytest.approx(-2.2488366666666, rel=1e-10)


def test_reference_thresholds():
    prof = best_response_profile(reference_agent(), P_I, P_J)
    assert prof.rejection_price == pytest.approx(0.34618167, abs=1e-8)
    assert prof.saturation_price == pytest.approx(0.45730667, abs=1e-8)


@pytest.mark.parametrize("eps", [1e-4, 1e-3])
def test_reference_thresholds_against_grid(eps):
    agent = reference_agent()
    prof = best_response_profile(agent, P_I, P_J)
    grid = GridSpec(e_step=1e-4)
    assert brute_best_response(agent, prof.rejection_price - eps, 10.0, P_I, P_J, grid) == 0.0
    assert brute_best_response(agent, prof.rejection_price + eps, 10.0, P_I, P_J, grid) > 0.0
    assert brute_best_response(agent, prof.saturation_price - eps, 10.0, P_I, P_J, grid) < 14.0
    assert brute_best_response(agent, prof.saturation_price + eps, 10.0, P_I, P_J, grid) == 14.0


def test_rejection_price_linear_in_time_weight():
    a = reference_agent(dod_linear=0.0)
    b = reference_agent(dod_linear=0.0, time_weight=60.0)
    assert best_response_profile(b, P_I, P_J).rejection_price == pytest.approx(
        2 * best_response_profile(a, P_I, P_J).rejection_price, rel=1e-15)


def test_zero_capacity_profile():
    prof = best_response_profile(reference_agent(initial_soc=80.0), P_I, P_J)
    assert prof.rejection_price == prof.saturation_price
    for p in (0.0, prof.rejection_price, 5.0):
        assert best_response(prof, p) == 0.0


def test_best_response_branches():
    prof = best_response_profile(reference_agent(), P_I, P_J)
    assert best_response(prof, prof.rejection_price) == 0.0
    mid = 0.5 * (prof.rejection_price + prof.saturation_price)
    assert best_response(prof, mid) == pytest.approx(7.0, abs=1e-9)
    assert best_response(prof, prof.saturation_price) == 14.0
    assert best_response(prof, prof.saturation_price + 1) == 14.0
    assert best_response(prof, 0.0) == 0.0


def test_profile_endpoints():
    rng = np.random.default_rng(11)
    for _ in range(200):
        agent = random_agent(rng)
        prof = best_response_profile(agent, 70.0, 40.0)
        assert prof.slope > 0
        assert prof.slope * prof.rejection_price - prof.intercept == pytest.approx(0.0, abs=1e-9)
        assert prof.slope * prof.saturation_price - prof.intercept == pytest.approx(agent.capacity, abs=1e-9)
        if agent.capacity > 0:
            assert prof.rejection_price < prof.saturation_price


def test_negative_rejection_price_serves_at_zero():
    agent = reference_agent(dod_linear=-3.0, time_weight=1.0)
    prof = best_response_profile(agent, P_I, P_J)
    assert prof.rejection_price < 0
    e0 = best_response(prof, 0.0)
    assert e0 > 0
    assert e0 == pytest.approx(brute_best_response(agent, 0.0, 0.0, P_I, P_J, GridSpec(1e-4)),
                               abs=2e-4 * agent.capacity)


def test_participation():
    agent = reference_agent()
    prof = best_response_profile(agent, P_I, P_J)
    assert not participates(agent, prof, prof.rejection_price, 10.0, P_I, P_J)
    assert not participates(agent, prof, 0.0, 10.0, P_I, P_J)
    assert participates(agent, prof, prof.rejection_price + 1e-3, 0.0, P_I, P_J)
    e_grid = brute_best_response(agent, prof.rejection_price + 1e-3, 0.0, P_I, P_J, GridSpec(1e-4))
    assert mes_utility(agent, e_grid, prof.rejection_price + 1e-3, 0.0, P_I, P_J) > 0
    assert participates(agent, prof, 10 * prof.saturation_price, 10.0, P_I, P_J)
    # full capacity at 10x the saturation price: 2*4.5731*14 - 45.73 - 11.67 - 50.8*(0.030625-0.03885)
    assert mes_utility(agent, 14.0, 10 * prof.saturation_price, 10.0, P_I, P_J) > 70


agents = st.builds(
    lambda seed: random_agent(np.random.default_rng(seed)),
    st.integers(0, 2**32 - 1),
)


@given(agents, st.floats(0.0, 3.0), st.floats(0.0, 30.0))
@settings(max_examples=300, deadline=None)
def test_oracle_equivalence(agent, p, target):
    prof = best_response_profile(agent, P_I, P_J)
    grid = GridSpec()
    brute = brute_best_response(agent, p, target, P_I, P_J, grid)
    assert abs(best_response(prof, p) - brute) <= 2 * grid.e_step * agent.capacity + 1e-12


@given(agents, st.floats(0.0, 30.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=300, deadline=None)
def test_follower_concavity(agent, target, x, h, p):
    cap = agent.capacity
    lo = x * cap * (1 - h)
    step = 0.5 * h * cap * (1 - x) + 0.0
    pts = [lo, lo + step, lo + 2 * step]
    u = [mes_utility(agent, e, p, target, P_I, P_J) for e in pts]
    assert u[1] >= 0.5 * (u[0] + u[2]) - 1e-9 * (1 + max(abs(v) for v in u))


@given(agents, st.floats(0.0, 3.0), st.floats(0.0, 3.0))
@settings(max_examples=300, deadline=None)
def test_monotone_and_lipschitz(agent, p, q):
    prof = best_response_profile(agent, P_I, P_J)
    lo, hi = sorted((p, q))
    e_lo, e_hi = best_response(prof, lo), best_response(prof, hi)
    assert e_lo <= e_hi
    assert e_hi - e_lo <= prof.slope * (hi - lo) + 1e-9
    if prof.rejection_price < lo < hi < prof.saturation_price:
        assert e_lo < e_hi


@given(agents, st.floats(0.0, 3.0))
@settings(max_examples=100, deadline=None)
def test_grid_argmax_unique(agent, p):
    prof = best_response_profile(agent, P_I, P_J)
    e = energy_grid(agent, GridSpec())
    u = utility_on_grid(agent, e, p, 5.0, P_I, P_J)
    top = np.flatnonzero(u >= u.max() - 1e-12 * (1 + abs(u.max())))
    if p != prof.rejection_price and agent.capacity > 0:
        # one maximizer, or two neighbours straddling the continuous optimum
        assert top.max() - top.min() <= 1
