import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cellenergy.analytic import ja_moments_motionless, jb_moments_power_control, jb_no_power_control
from cellenergy.mobility import MobilityModel
from cellenergy.model import CellConfig, PathLoss, PathLossKind
from cellenergy.montecarlo import (SimulationPlan, StatisticEstimate, configuration_energy, empirical_tail,
                                   replicate, simulate, simulate_ja, simulate_jb, tail_from_samples,
                                   variance_vs_epsilon)
from cellenergy.ppp import Disk, MarkedConfiguration
from cellenergy.traffic import TrafficBatch, TrafficModel

SMALL = CellConfig(100.0, 2e-3, horizon=200.0)
TRAFFIC = TrafficModel(mu_on=0.05, mu_off=0.05)


def _one_user(pos, vel=None, on=None, horizon=200.0):
    traffic = None
    if on is not None:
        traffic = TrafficBatch(np.array([on[0]]), np.array([on[1]], dtype=float).reshape(1, -1), horizon)
    return MarkedConfiguration(np.array([pos], dtype=float), Disk(1e4), traffic,
                               None if vel is None else np.array([vel], dtype=float))


@given(st.floats(1.0, 99.0), st.floats(0, 2 * math.pi))
def test_single_always_on_user(r, angle):
    cfg = _one_user((r * math.cos(angle), r * math.sin(angle)))
    ja, jb = configuration_energy(cfg, SMALL)
    assert ja == pytest.approx(SMALL.beta_a * r**3 * 200.0, rel=1e-12)
    assert jb == pytest.approx(SMALL.beta_b * r**3 * 200.0, rel=1e-12)


def test_user_outside_cell_costs_nothing():
    assert configuration_energy(_one_user((150.0, 0.0)), SMALL) == (0.0, 0.0)


def test_switching_user():
    cfg = _one_user((10.0, 0.0), on=(False, [50.0, 80.0]))
    assert configuration_energy(cfg, SMALL)[0] == pytest.approx(SMALL.beta_a * 1000.0 * 30.0, rel=1e-12)


@pytest.mark.parametrize("pos, vel, on", [
    ((-150.0, 20.0), (1.0, 0.0), None),
    ((-30.0, -60.0), (0.3, 0.7), (True, [40.0, 90.0, 130.0])),
    ((0.0, 0.0), (0.9, 0.1), (False, [3.0])),
])
def test_moving_user_against_quadrature(pos, vel, on):
    cfg = _one_user(pos, vel, on)
    p, v = np.array(pos), np.array(vel)

    def power(t):
        x = p + v * t
        r = math.hypot(*x)
        return r**3 if r <= 100.0 else 0.0

    if on is None:
        spans = [(0.0, 200.0)]
    else:
        edges = [0.0] + list(on[1]) + [200.0]
        spans = [(a, b) for j, (a, b) in enumerate(zip(edges, edges[1:])) if (j % 2 == 0) == on[0]]
    exact = sum(integrate.quad(power, a, b, limit=400, epsabs=0, epsrel=1e-11)[0] for a, b in spans)
    ja, _ = configuration_energy(cfg, SMALL, time_step=5.0)
    assert ja == pytest.approx(SMALL.beta_a * exact, rel=1e-8)


def test_moving_beacon_tracks_farthest_user():
    # two users crossing the cell; the beacon follows the max over in-cell users
    cfg = MarkedConfiguration(np.array([[-120.0, 0.0], [0.0, -50.0]]), Disk(1e4), None,
                              np.array([[1.0, 0.0], [0.0, 0.5]]))
    _, jb = configuration_energy(cfg, SMALL, time_step=0.5)

    def beacon(t):
        rs = [math.hypot(-120.0 + t, 0.0), math.hypot(0.0, -50.0 + 0.5 * t)]
        rs = [r for r in rs if r <= 100.0]
        return max(rs) ** 3 if rs else 0.0

    exact = integrate.quad(beacon, 0, 200, points=[20.0, 120.0, 150.0, 200.0], limit=500)[0]
    assert jb == pytest.approx(SMALL.beta_b * exact, rel=2e-3)


def test_empty_cell_is_zero():
    cell = CellConfig(100.0, 1e-12)
    rep = simulate(cell, TRAFFIC, MobilityModel.motionless(), SimulationPlan(200))
    assert np.all(rep.samples["JA"] == 0) and np.all(rep.samples["JB_power_control"] == 0)


def test_static_mean_and_variance_against_analytic():
    plan = SimulationPlan(4000, master_seed=3)
    rep = simulate_ja(SMALL, TRAFFIC, MobilityModel.motionless(), plan)
    exact = ja_moments_motionless(SMALL, TRAFFIC, 2)
    s = rep["JA"]
    assert abs(s.mean - exact.mean) < 3 * s.mean_se
    assert abs(s.variance - exact.variance) < 3 * s.variance_se


def test_power_control_never_exceeds_fixed():
    rep = simulate(SMALL, TRAFFIC, MobilityModel.constant_velocity(1.0), SimulationPlan(60, master_seed=1))
    assert np.all(rep.samples["JB_power_control"] <= rep.samples["JB_fixed"] * (1 + 1e-9))
    static = simulate_jb(SMALL, MobilityModel.motionless(), SimulationPlan(3000, master_seed=2))
    s = static["JB_power_control"]
    assert np.all(static.samples["JB_power_control"] <= jb_no_power_control(SMALL) * (1 + 1e-12))
    assert abs(s.mean - jb_moments_power_control(SMALL, 1)) < 3 * s.mean_se


def test_fixed_beacon_mode_is_constant():
    rep = simulate_jb(SMALL, MobilityModel.motionless(), SimulationPlan(5), mode="fixed")
    assert rep["JB_fixed"].mean == jb_no_power_control(SMALL) and rep["JB_fixed"].variance == 0
    with pytest.raises(ValueError):
        simulate_jb(SMALL, MobilityModel.motionless(), SimulationPlan(5), mode="other")


def test_mean_is_mobility_invariant():
    exact = ja_moments_motionless(SMALL, TRAFFIC, 1).mean
    rep = simulate_ja(SMALL, TRAFFIC, MobilityModel.constant_velocity(0.5, 2.0), SimulationPlan(400, master_seed=4))
    assert abs(rep["JA"].mean - exact) < 3 * rep["JA"].mean_se


def test_replications_independent_of_worker_count():
    mob = MobilityModel.constant_velocity(1.0)
    a = simulate(SMALL, TRAFFIC, mob, SimulationPlan(40, master_seed=9, chunk=7, workers=1))
    b = simulate(SMALL, TRAFFIC, mob, SimulationPlan(40, master_seed=9, chunk=7, workers=2))
    c = simulate(SMALL, TRAFFIC, mob, SimulationPlan(40, master_seed=9, chunk=40, workers=1))
    for k in a.samples:
        assert np.array_equal(a.samples[k], b.samples[k])
        assert np.array_equal(a.samples[k], c.samples[k])
    assert a.to_json(timing=False) == b.to_json(timing=False)


def test_replicate_is_pure():
    plan = SimulationPlan(1, master_seed=5)
    assert replicate(17, SMALL, TRAFFIC, MobilityModel.motionless(), plan)[:2] == \
        replicate(17, SMALL, TRAFFIC, MobilityModel.motionless(), plan)[:2]


def test_coarse_step_warns():
    # the kink at r0 makes a single panel per crossing visibly inaccurate
    cell = CellConfig(100.0, 1e-4, PathLoss(PathLossKind.CLIPPED, 6.0, r0=90.0), horizon=200.0)
    mob = MobilityModel.constant_velocity(1.0)
    rep = simulate_ja(cell, TrafficModel.always_on(), mob, SimulationPlan(20, time_step=200.0, error_check_every=1))
    assert any("too coarse" in w for w in rep.warnings)
    fine = simulate_ja(cell, TrafficModel.always_on(), mob, SimulationPlan(20, time_step=5.0, error_check_every=1))
    assert fine.warnings == []


def test_statistic_estimate_on_normal_samples(rng):
    x = rng.normal(3.0, 2.0, 200_000)
    s = StatisticEstimate.from_samples("x", x)
    assert abs(s.mean - 3.0) < 3 * s.mean_se
    assert abs(s.variance - 4.0) < 3 * s.variance_se
    assert s.variance_se == pytest.approx(4.0 * math.sqrt(2 / 200_000), rel=0.02)
    assert s.mean_ci == pytest.approx(1.959964 * s.mean_se, rel=1e-5)


def test_report_serialisation(tmp_path):
    rep = simulate(SMALL, TRAFFIC, MobilityModel.motionless(), SimulationPlan(30))
    d = rep.to_dict(timing=False)
    assert "timing" not in d and set(d["statistics"]) == {"JA", "JB_power_control", "JB_fixed", "JTotal"}
    assert rep.csv_text().splitlines()[0].startswith("statistic")
    rep.dump_replications(tmp_path / "reps.csv")
    assert len((tmp_path / "reps.csv").read_text().splitlines()) == 31


def test_variance_vs_epsilon_requires_property_t():
    with pytest.raises(ValueError):
        variance_vs_epsilon(SMALL, TRAFFIC, MobilityModel.motionless(), [1.0], SimulationPlan(2))


def test_variance_vs_epsilon_unit_row_matches_plain_run():
    mob = MobilityModel.constant_velocity(0.5)
    plan = SimulationPlan(30, master_seed=8)
    table = variance_vs_epsilon(SMALL, TRAFFIC, mob, [1.0, 0.5], plan)
    plain = simulate_ja(SMALL, TRAFFIC, mob, plan)["JA"]
    assert table.rows[0].variance == plain.variance and table.rows[0].mean == plain.mean
    assert set(table.to_dict()) == {"rows", "monotone"}


def test_tail_extremes():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    assert tail_from_samples(x, 0.0).probability == 1.0
    assert tail_from_samples(x, np.inf).probability == 0.0
    t = tail_from_samples(x, 2.5)
    assert t.probability == 0.5 and t.lower < 0.5 < t.upper


def test_empirical_tail_reuses_report():
    plan = SimulationPlan(50)
    rep = simulate(SMALL, TRAFFIC, MobilityModel.motionless(), plan)
    thr = float(np.median(rep.samples["JTotal"]))
    assert empirical_tail(SMALL, TRAFFIC, plan, thr, report=rep) == tail_from_samples(rep.samples["JTotal"], thr)
    fresh = empirical_tail(SMALL, TRAFFIC, plan, thr)
    assert fresh.probability == pytest.approx(0.5, abs=0.02)


def test_plan_validation():
    for kw in ({"replications": 0}, {"replications": 1, "time_step": 0.0}, {"replications": 1, "outputs": ("X",)},
               {"replications": 1, "total_beacon": "none"}):
        with pytest.raises(ValueError):
            SimulationPlan(**kw)


def test_clipped_pathloss_cell():
    cell = CellConfig(100.0, 2e-3, PathLoss(PathLossKind.CLIPPED, 3.0, r0=20.0), horizon=200.0)
    rep = simulate_ja(cell, TRAFFIC, MobilityModel.motionless(), SimulationPlan(3000, master_seed=12))
    exact = ja_moments_motionless(cell, TRAFFIC, 1).mean
    assert abs(rep["JA"].mean - exact) < 3 * rep["JA"].mean_se
