import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cellenergy.traffic import (MomentMethod, TrafficBatch, TrafficKind, TrafficModel,
                                TrafficTrajectory, UnsupportedOrderError, analytic_second_moment,
                                integrate_activity, sample_trajectories, sample_trajectory,
                                traffic_moment)


def test_pi_on():
    assert TrafficModel(mu_on=2.0, mu_off=2.0).pi_on == 0.5
    assert TrafficModel(mu_on=3.0, mu_off=1.0).pi_on == 0.25
    assert TrafficModel.always_on().pi_on == 1.0


def test_always_on_trajectory(rng):
    tr = sample_trajectory(TrafficModel.always_on(), 7.0, rng)
    assert tr.initial_on and tr.switch_times.size == 0
    assert integrate_activity(tr, 7.0) == 7.0


def test_single_switch_half_horizon():
    tr = TrafficTrajectory(False, np.array([5.0]), 10.0)
    assert integrate_activity(tr) == 5.0
    assert tr.state(4.9) == 0.0 and tr.state(5.0) == 1.0
    assert tr.on_intervals() == [(5.0, 10.0)]


def test_trajectory_validation():
    with pytest.raises(ValueError):
        TrafficTrajectory(True, np.array([3.0, 2.0]), 10.0)


def test_batch_matches_single_trajectories(rng):
    batch = sample_trajectories(TrafficModel(mu_on=0.3, mu_off=0.7), 50.0, 200, rng)
    on = batch.on_time()
    assert np.all((on >= 0) & (on <= 50.0))
    for i in range(0, 200, 17):
        tr = batch[i]
        assert integrate_activity(tr) == pytest.approx(on[i], abs=1e-12)
        assert sum(b - a for a, b in tr.on_intervals()) == pytest.approx(on[i], abs=1e-12)
        assert np.all(np.diff(tr.switch_times) > 0)


def test_initial_state_is_stationary(rng):
    m = TrafficModel(mu_on=1.0, mu_off=3.0)
    batch = sample_trajectories(m, 1.0, 200_000, rng)
    p = batch.initial_on.mean()
    assert abs(p - 0.75) < 4 * math.sqrt(0.75 * 0.25 / 200_000)


def test_switching_rate(rng):
    # stationary switching rate pi_on mu_on + pi_off mu_off, long-run average
    m = TrafficModel(mu_on=0.5, mu_off=2.0)
    T = 400.0
    batch = sample_trajectories(m, T, 2000, rng)
    counts = np.isfinite(batch.switch_times).sum(axis=1)
    expected = T * m.switching_rate
    assert expected == pytest.approx(T * 0.8)
    assert abs(counts.mean() - expected) < 4 * counts.std() / math.sqrt(len(counts))


def test_activity_is_flat_in_time(rng):
    m = TrafficModel(mu_on=0.2, mu_off=0.1)
    batch = sample_trajectories(m, 30.0, 40_000, rng)
    se = math.sqrt(m.pi_on * m.pi_off / 40_000)
    for t in (0.0, 3.0, 11.0, 29.9):
        frac = np.mean([batch[i].state(t) for i in range(0, 40_000, 8)])
        assert abs(frac - m.pi_on) < 5 * se * math.sqrt(8)


def test_mean_occupation(rng):
    m = TrafficModel(mu_on=0.05, mu_off=0.15)
    on = sample_trajectories(m, 100.0, 100_000, rng).on_time()
    assert abs(on.mean() - m.pi_on * 100.0) < 4 * on.std() / math.sqrt(len(on))


def test_moment_always_on():
    assert traffic_moment(TrafficModel.always_on(), 5, 2.0) == (32.0, 0.0)


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.1, 100))
def test_first_moment(mu_on, mu_off, T):
    m = TrafficModel(mu_on=mu_on, mu_off=mu_off)
    assert traffic_moment(m, 1, T)[0] == pytest.approx(m.pi_on * T, rel=1e-14)


def test_second_moment_closed_form_against_monte_carlo():
    # 10^6 simulated trajectories: the closed form must sit within 3 standard errors
    m = TrafficModel(mu_on=1.0, mu_off=1.0)
    closed = traffic_moment(m, 2, 10.0, MomentMethod.ANALYTIC)[0]
    assert closed == pytest.approx(25 + 0.5 * (5 - (1 - math.exp(-20)) / 4), rel=1e-14)
    est, se = traffic_moment(m, 2, 10.0, MomentMethod.MONTE_CARLO, samples=1_000_000,
                             rng=np.random.default_rng(7), chunk=100_000)
    assert abs(est - closed) < 3 * se


@pytest.mark.parametrize("mu_on, mu_off, T", [(1, 1, 10), (0.01, 0.01, 3600), (2.0, 0.5, 3.0), (0.1, 5, 40)])
def test_exact_matches_closed_form(mu_on, mu_off, T):
    m = TrafficModel(mu_on=mu_on, mu_off=mu_off)
    for k in (1, 2):
        assert traffic_moment(m, k, T, "exact")[0] == pytest.approx(traffic_moment(m, k, T)[0], rel=1e-9)


@pytest.mark.parametrize("k", [3, 4])
def test_exact_higher_orders_against_monte_carlo(k):
    m = TrafficModel(mu_on=0.7, mu_off=0.4)
    exact = traffic_moment(m, k, 6.0, "exact")[0]
    est, se = traffic_moment(m, k, 6.0, "montecarlo", samples=300_000, rng=np.random.default_rng(k))
    assert abs(est - exact) < 4 * se


def test_analytic_refuses_high_orders():
    with pytest.raises(UnsupportedOrderError):
        traffic_moment(TrafficModel(), 3, 1.0, MomentMethod.ANALYTIC)


def test_asymptotic_ratio_tends_to_pi_on_power():
    m = TrafficModel(mu_on=1.0, mu_off=3.0)
    ratios = [traffic_moment(m, 3, T, "exact")[0] / T**3 for T in (10, 100, 1000, 10000)]
    errs = [abs(r - m.pi_on**3) for r in ratios]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3
    assert traffic_moment(m, 3, 5.0, "asymptotic")[0] == pytest.approx((0.75 * 5) ** 3)


@given(st.integers(1, 5), st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0.5, 20))
def test_moment_bounds_and_jensen(k, mu_on, mu_off, T):
    m = TrafficModel(mu_on=mu_on, mu_off=mu_off)
    mk = traffic_moment(m, k, T, "exact")[0]
    m1 = m.pi_on * T
    assert m1**k * (1 - 1e-9) <= mk <= T**k * (1 + 1e-9)


def test_second_moment_grid_against_monte_carlo():
    gen = np.random.default_rng(99)
    for mu_on, mu_off, T in [(0.5, 0.5, 4.0), (2.0, 0.2, 10.0), (0.05, 1.0, 30.0)]:
        m = TrafficModel(mu_on=mu_on, mu_off=mu_off)
        est, se = traffic_moment(m, 2, T, "montecarlo", samples=200_000, rng=gen)
        assert abs(est - analytic_second_moment(m, T)) < 3 * se


def test_empty_batch(rng):
    b = sample_trajectories(TrafficModel(), 5.0, 0, rng)
    assert isinstance(b, TrafficBatch) and len(b) == 0 and b.on_time().shape == (0,)
    assert TrafficModel(TrafficKind.ALWAYS_ON).switching_rate == 0.0
