import csv
import math

import numpy as np
import pytest
from scipy import stats

from cellenergy.mobility import MobilityModel
from cellenergy.ppp import (Annulus, Disk, SeedLineage, attach_marks, displace, sample_ppp,
                            sampling_window)
from cellenergy.traffic import TrafficModel


def test_mean_count_reference_cell():
    # sample-mean oracle over 10^5 independent draws
    gen = np.random.default_rng(1)
    counts = np.array([len(sample_ppp(1e-4, Disk(500.0), gen)) for _ in range(100_000)])
    expected = 1e-4 * math.pi * 500.0**2
    assert expected == pytest.approx(78.5398, abs=1e-4)
    assert abs(counts.mean() - expected) < 3 * math.sqrt(expected / counts.size)
    assert counts.var() == pytest.approx(expected, rel=0.02)


def test_points_lie_in_window(rng):
    for window in (Disk(3.0, (1.0, -2.0)), Annulus(1.0, 2.0)):
        cfg = sample_ppp(50.0, window, rng)
        assert len(cfg) > 0 and window.contains(cfg.positions).all()


def test_void_probability(rng):
    # P(no point in a sub-disk of radius 1) = exp(-lambda pi)
    lam, n = 0.4, 40_000
    hits = 0
    for _ in range(n):
        pts = sample_ppp(lam, Disk(3.0), rng).positions
        hits += not np.any(np.hypot(pts[:, 0] - 1.0, pts[:, 1]) < 1.0)
    p = math.exp(-lam * math.pi)
    assert abs(hits / n - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_radial_uniformity(rng):
    pts = sample_ppp(200.0, Disk(2.0), rng).positions
    r = np.hypot(*pts.T)
    assert stats.kstest((r / 2.0) ** 2, "uniform").pvalue > 1e-3
    assert stats.kstest(np.arctan2(pts[:, 1], pts[:, 0]), "uniform", args=(-math.pi, 2 * math.pi)).pvalue > 1e-3


def test_superposition(rng):
    a = [len(sample_ppp(0.2, Disk(2.0), rng)) + len(sample_ppp(0.3, Disk(2.0), rng)) for _ in range(20_000)]
    mean = 0.5 * math.pi * 4
    assert abs(np.mean(a) - mean) < 4 * math.sqrt(mean / 20_000)
    assert np.var(a) == pytest.approx(mean, rel=0.05)


def test_disjoint_regions_uncorrelated(rng):
    inner, outer = [], []
    for _ in range(20_000):
        r = np.hypot(*sample_ppp(1.0, Disk(2.0), rng).positions.T)
        inner.append(np.sum(r < 1))
        outer.append(np.sum(r >= 1))
    assert abs(np.corrcoef(inner, outer)[0, 1]) < 4 / math.sqrt(20_000)


def test_same_lineage_same_configuration():
    lin = SeedLineage(12, 3)
    a = sample_ppp(1e-3, Disk(100.0), lin.generator(), lin)
    b = sample_ppp(1e-3, Disk(100.0), lin.generator(), lin)
    c = sample_ppp(1e-3, Disk(100.0), lin.advance().generator())
    assert np.array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, c.positions)


def test_rejects_bad_density(rng):
    for lam in (0.0, -1.0, math.inf):
        with pytest.raises(ValueError):
            sample_ppp(lam, Disk(1.0), rng)
    with pytest.raises(ValueError):
        Annulus(2.0, 1.0)


def test_marks_have_stationary_traffic(rng):
    m = TrafficModel(mu_on=1.0, mu_off=3.0)
    cfg = attach_marks(sample_ppp(1.0, Disk(200.0), rng), m, MobilityModel.motionless(), 10.0, rng)
    n = len(cfg)
    assert abs(cfg.traffic.initial_on.mean() - 0.75) < 4 * math.sqrt(0.1875 / n)
    assert np.array_equal(displace(cfg, 5.0), cfg.positions)


def test_displaced_process_is_poisson_on_cell():
    # counts of displaced users inside the cell are Poisson(lambda pi R^2)
    gen = np.random.default_rng(5)
    R, lam, T = 50.0, 2e-3, 20.0
    mob = MobilityModel.constant_velocity(1.0, 3.0)
    window = sampling_window(R, mob, T)
    assert window.radius == pytest.approx(R + 3.0 * T)
    counts = []
    for _ in range(6000):
        cfg = attach_marks(sample_ppp(lam, window, gen), TrafficModel.always_on(), mob, T, gen)
        moved = displace(cfg, T)
        counts.append(np.sum(np.hypot(*moved.T) <= R))
    counts = np.array(counts)
    mean = lam * math.pi * R**2
    bins = np.arange(0, 36)
    obs = np.array([np.sum(counts == k) for k in bins[:-1]] + [np.sum(counts >= bins[-1])])
    pmf = stats.poisson.pmf(bins[:-1], mean)
    exp = np.append(pmf, 1 - pmf.sum()) * counts.size
    keep = exp >= 5
    obs = np.append(obs[keep], obs[~keep].sum())
    exp = np.append(exp[keep], exp[~keep].sum())
    assert stats.chisquare(obs, exp).pvalue > 1e-3


def test_csv_dump(tmp_path, rng):
    cfg = attach_marks(sample_ppp(0.5, Disk(3.0), rng), TrafficModel(), MobilityModel.constant_velocity(2.0),
                       5.0, rng)
    path = tmp_path / "cfg.csv"
    cfg.to_csv(path)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == len(cfg)
    assert list(rows[0]) == ["user_id", "x_m", "y_m", "on_at_0", "vx_mps", "vy_mps"]
    for i, row in enumerate(rows):
        assert float(row["x_m"]) == cfg.positions[i, 0]
        assert math.hypot(float(row["vx_mps"]), float(row["vy_mps"])) == pytest.approx(2.0)
