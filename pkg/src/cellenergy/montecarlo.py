"""Replicated simulation of the additive and broadcast energies.

Replication ``i`` draws everything from ``SeedLineage(master_seed, i)``, and
per-replication values are reduced in index order, so results do not depend
on the number of worker processes.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .analytic.moments import jb_no_power_control
from .mobility import MobilityModel
from .model import CellConfig
from .ppp import Disk, MarkedConfiguration, SeedLineage, sample_ppp, sampling_window
from .traffic import TrafficModel, sample_trajectories

log = logging.getLogger(__name__)

OUTPUTS = ("JA", "JB_power_control", "JB_fixed", "JTotal")
Z95 = 1.959963984540054
_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_X, _GL_W = 0.5 * (_GL_X + 1), 0.5 * _GL_W


@dataclass(frozen=True)
class SimulationPlan:
    replications: int
    master_seed: int = 0
    time_step: float = 10.0  # s, quadrature panel for mobile users
    outputs: tuple[str, ...] = OUTPUTS
    workers: int = 1
    total_beacon: str = "JB_fixed"  # beacon term added into JTotal
    window_margin: float | None = None  # m; default v_cap * T
    error_check_every: int = 100  # step-halving check on every k-th replication
    chunk: int = 500

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.time_step > 0:
            raise ValueError("time_step must be positive")
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown:
            raise ValueError(f"unknown outputs {sorted(unknown)}")
        if self.total_beacon not in ("JB_fixed", "JB_power_control"):
            raise ValueError("total_beacon must be JB_fixed or JB_power_control")


@dataclass
class StatisticEstimate:
    name: str
    n: int
    raw_moments: list[float]
    mean: float
    variance: float
    mean_se: float
    variance_se: float
    mean_ci: float  # 95% half-widths
    variance_ci: float

    @classmethod
    def from_samples(cls, name: str, x: np.ndarray) -> "StatisticEstimate":
        n = len(x)
        xl = np.asarray(x, dtype=np.longdouble)
        raw = [float(np.sum(xl**k) / n) for k in range(1, 5)]
        mean = np.sum(xl) / n
        d = xl - mean
        m2, m4 = np.sum(d * d) / n, np.sum(d**4) / n
        var = float(m2 * n / (n - 1)) if n > 1 else 0.0
        mean_se = math.sqrt(var / n)
        if n > 3:
            vse2 = float(m4 - m2 * m2 * (n - 3) / (n - 1)) / n
            var_se = math.sqrt(max(vse2, 0.0))
        else:
            var_se = math.inf if var > 0 else 0.0
        return cls(name, n, raw, float(mean), var, mean_se, var_se, Z95 * mean_se, Z95 * var_se)


@dataclass
class EstimateReport:
    statistics: dict[str, StatisticEstimate]
    replications: int
    master_seed: int
    timing: float = 0.0
    warnings: list[str] = field(default_factory=list)
    samples: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __getitem__(self, name) -> StatisticEstimate:
        return self.statistics[name]

    def to_dict(self, timing: bool = True) -> dict:
        d = {"replications": self.replications, "master_seed": self.master_seed,
             "statistics": {k: asdict(v) for k, v in self.statistics.items()},
             "warnings": list(self.warnings)}
        if timing:
            d["timing_s"] = self.timing
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["statistic", "n", "mean", "variance", "mean_ci95", "variance_ci95",
                    "m1", "m2", "m3", "m4"])
        for s in self.statistics.values():
            w.writerow([s.name, s.n, repr(s.mean), repr(s.variance), repr(s.mean_ci),
                        repr(s.variance_ci), *map(repr, s.raw_moments)])
        return buf.getvalue()

    def dump_replications(self, path) -> None:
        cols = [c for c in ("JA", "JB_power_control", "JB_fixed", "JTotal") if c in self.samples]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replication", *cols])
            for i in range(self.replications):
                w.writerow([i, *(repr(float(self.samples[c][i])) for c in cols)])


def _cell_crossing(pos, vel, radius, horizon):
    """Entry/exit times of straight paths through the disk, clipped to [0, T]."""
    a = np.einsum("ij,ij->i", vel, vel)
    b = 2 * np.einsum("ij,ij->i", pos, vel)
    c = np.einsum("ij,ij->i", pos, pos) - radius**2
    t1 = np.full(len(pos), np.inf)
    t2 = np.full(len(pos), -np.inf)
    moving = a > 0
    disc = b * b - 4 * a * c
    ok = moving & (disc > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(ok, (-b - sq) / (2 * a), t1)
        t2 = np.where(ok, (-b + sq) / (2 * a), t2)
    still_in = ~moving & (c <= 0)
    t1[still_in], t2[still_in] = 0.0, horizon
    return np.maximum(t1, 0.0), np.minimum(t2, horizon)


def _path_integral(pos, vel, lo, hi, inv_radial, step):
    """``sum_j int_{lo_j}^{hi_j} 1/L(|pos_j + vel_j t|) dt`` by composite 4-point Gauss-Legendre."""
    if len(lo) == 0:
        return 0.0
    length = hi - lo
    panels = np.maximum(np.ceil(length / step).astype(np.int64), 1)
    seg = np.repeat(np.arange(len(lo)), panels)
    first = np.cumsum(panels) - panels
    k = np.arange(len(seg)) - first[seg]
    width = (length / panels)[seg]
    t = (lo[seg] + k * width)[:, None] + width[:, None] * _GL_X
    p = pos[seg][:, None, :] + vel[seg][:, None, :] * t[..., None]
    r = np.hypot(p[..., 0], p[..., 1])
    vals = inv_radial(np.maximum(r, 1e-300)) @ _GL_W
    return float(np.sum(vals * width))


def _beacon_mobile(pos, vel, t1, t2, inv_radial, horizon, step):
    """Midpoint-rule ``int_0^T max_{in-cell users} 1/L dt`` (an empty cell contributes 0)."""
    steps = max(int(math.ceil(horizon / step)), 1)
    h = horizon / steps
    j_lo = np.maximum(np.ceil(t1 / h - 0.5), 0).astype(np.int64)
    j_hi = np.minimum(np.floor(t2 / h - 0.5), steps - 1).astype(np.int64)
    count = np.maximum(j_hi - j_lo + 1, 0)
    if count.sum() == 0:
        return 0.0
    user = np.repeat(np.arange(len(pos)), count)
    j = j_lo[user] + (np.arange(len(user)) - (np.cumsum(count) - count)[user])
    p = pos[user] + vel[user] * ((j + 0.5) * h)[:, None]
    vals = inv_radial(np.maximum(np.hypot(p[:, 0], p[:, 1]), 1e-300))
    best = np.zeros(steps)
    np.maximum.at(best, j, vals)
    return float(best.sum() * h)


def configuration_energy(cfg: MarkedConfiguration, cell: CellConfig, time_step: float = 10.0,
                         beacon: bool = True) -> tuple[float, float]:
    """``(J_A, J_B)`` of one marked configuration, J_B under beacon power control.

    Motionless users use the exact factorisation ``(int A) / l(x) 1{x in C}``;
    moving users are integrated between their exact cell entry and exit
    times with composite Gauss-Legendre panels of length ``time_step``.
    """
    beta_a, beta_b = cell.betas
    R, T = cell.radius, cell.horizon
    inv = cell.pathloss.inv_radial
    pos = cfg.positions
    if cfg.velocities is None or not np.any(cfg.velocities):
        inside = np.hypot(pos[:, 0], pos[:, 1]) <= R
        li = inv(np.hypot(pos[inside, 0], pos[inside, 1])) if inside.any() else np.zeros(0)
        on = cfg.traffic.subset(inside).on_time() if cfg.traffic is not None else np.full(len(li), T)
        ja = beta_a * float(np.sum(on * li))
        jb = beta_b * T * float(li.max()) if len(li) and beacon else 0.0
        return ja, jb
    vel = cfg.velocities
    t1, t2 = _cell_crossing(pos, vel, R, T)
    if cfg.traffic is None:
        user = np.arange(len(pos))
        s, e = np.zeros(len(pos)), np.full(len(pos), T)
    else:
        user, s, e = cfg.traffic.on_intervals()
    lo, hi = np.maximum(s, t1[user]), np.minimum(e, t2[user])
    keep = hi > lo
    user, lo, hi = user[keep], lo[keep], hi[keep]
    ja = beta_a * _path_integral(pos[user], vel[user], lo, hi, inv, time_step)
    jb = beta_b * _beacon_mobile(pos, vel, t1, t2, inv, T, time_step) if beacon else 0.0
    return ja, jb


def replicate(i: int, cell: CellConfig, traffic: TrafficModel, mobility: MobilityModel,
              plan: SimulationPlan) -> tuple[float, float, float]:
    """One replication: ``(J_A, J_B with power control, J_A at half step or nan)``."""
    lineage = SeedLineage(plan.master_seed, i)
    rng = lineage.generator()
    R, T = cell.radius, cell.horizon
    want_pc = "JB_power_control" in plan.outputs or plan.total_beacon == "JB_power_control"

    if mobility.is_static:
        cfg = sample_ppp(cell.density, Disk(R), rng, lineage)
        cfg = replace(cfg, traffic=sample_trajectories(traffic, T, len(cfg), rng))
        ja, jb = configuration_energy(cfg, cell, plan.time_step, want_pc)
        return ja, jb, math.nan

    if plan.window_margin is None:
        window = sampling_window(R, mobility, T)
    else:
        window = Disk(R + plan.window_margin)
    cfg = sample_ppp(cell.density, window, rng, lineage)
    vel = mobility.sample_velocities(len(cfg), rng)
    t1, t2 = _cell_crossing(cfg.positions, vel, R, T)
    hit = t2 > t1
    # users that never enter the cell contribute nothing; their traffic is not drawn
    cfg = replace(cfg, positions=cfg.positions[hit], velocities=vel[hit], epsilon=mobility.epsilon)
    cfg = replace(cfg, traffic=sample_trajectories(traffic, T, len(cfg), rng))
    ja, jb = configuration_energy(cfg, cell, plan.time_step, want_pc)
    ja_half = math.nan
    if plan.error_check_every and i % plan.error_check_every == 0:
        ja_half = configuration_energy(cfg, cell, plan.time_step / 2, beacon=False)[0]
    return ja, (jb if want_pc else math.nan), ja_half


def _run_chunk(args):
    start, stop, cell, traffic, mobility, plan = args
    return np.array([replicate(i, cell, traffic, mobility, plan) for i in range(start, stop)]).reshape(-1, 3)


def simulate(cell: CellConfig, traffic: TrafficModel, mobility: MobilityModel,
             plan: SimulationPlan) -> EstimateReport:
    """Run ``plan.replications`` independent replications and summarise them."""
    t0 = time.perf_counter()
    bounds = list(range(0, plan.replications, plan.chunk)) + [plan.replications]
    tasks = [(a, b, cell, traffic, mobility, plan) for a, b in zip(bounds[:-1], bounds[1:])]
    if plan.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    table = np.concatenate(parts, axis=0)
    ja, jb_pc, ja_half = table[:, 0], table[:, 1], table[:, 2]
    jb_fixed = np.full(plan.replications, jb_no_power_control(cell))
    if mobility.is_static:
        jb_pc = np.where(np.isnan(jb_pc), 0.0, jb_pc)
    total = ja + (jb_fixed if plan.total_beacon == "JB_fixed" else jb_pc)
    samples = {"JA": ja, "JB_power_control": jb_pc, "JB_fixed": jb_fixed, "JTotal": total}
    samples = {k: v for k, v in samples.items() if k in plan.outputs}

    warnings = []
    checked = ~np.isnan(ja_half)
    if checked.any():
        worst = float(np.max(np.abs(ja_half[checked] - ja[checked])))
        scale = abs(float(np.mean(ja)))
        if scale > 0 and worst > 0.01 * scale:
            warnings.append(f"time_step {plan.time_step} s too coarse: step-halving changes J_A by "
                            f"{worst / scale:.2%} of its mean")
            log.warning(warnings[-1])
    stats = {k: StatisticEstimate.from_samples(k, v) for k, v in samples.items()}
    return EstimateReport(stats, plan.replications, plan.master_seed,
                          time.perf_counter() - t0, warnings, samples)


def simulate_ja(cell, traffic, mobility, plan) -> EstimateReport:
    return simulate(cell, traffic, mobility, replace(plan, outputs=("JA",)))


def simulate_jb(cell, mobility, plan, mode: str = "power_control",
                traffic: TrafficModel | None = None) -> EstimateReport:
    """Beacon energy; ``mode='fixed'`` is deterministic and needs no simulation."""
    from .traffic import TrafficKind
    if mode == "fixed":
        value = np.full(plan.replications, jb_no_power_control(cell))
        return EstimateReport({"JB_fixed": StatisticEstimate.from_samples("JB_fixed", value)},
                              plan.replications, plan.master_seed, samples={"JB_fixed": value})
    if mode != "power_control":
        raise ValueError(f"unknown beacon mode {mode!r}")
    # the beacon ignores activity; always-on traffic skips trajectory sampling cost
    traffic = TrafficModel(TrafficKind.ALWAYS_ON) if traffic is None else traffic
    return simulate(cell, traffic, mobility, replace(plan, outputs=("JB_power_control",),
                                                     total_beacon="JB_power_control"))


@dataclass
class EpsilonRow:
    epsilon: float
    variance: float
    variance_ci: float
    mean: float
    mean_ci: float


@dataclass
class EpsilonTable:
    rows: list[EpsilonRow]
    monotone: bool  # non-increasing as epsilon shrinks, up to CI overlap

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in self.rows], "monotone": self.monotone}


def variance_vs_epsilon(cell, traffic, base_mobility: MobilityModel, epsilons, plan) -> EpsilonTable:
    """Variance of J_A under the accelerated mobility ``t -> M(t / eps)``."""
    if not base_mobility.property_t:
        raise ValueError("high-mobility limit needs a mobility law with property T")
    rows = []
    for eps in epsilons:
        rep = simulate(cell, traffic, base_mobility.accelerated(eps), replace(plan, outputs=("JA",)))
        s = rep["JA"]
        rows.append(EpsilonRow(eps, s.variance, s.variance_ci, s.mean, s.mean_ci))
    ordered = sorted(rows, key=lambda r: -r.epsilon)
    monotone = all(b.variance <= a.variance + a.variance_ci + b.variance_ci
                   for a, b in zip(ordered, ordered[1:]))
    return EpsilonTable(rows, monotone)


@dataclass
class TailEstimate:
    threshold: float
    probability: float
    lower: float
    upper: float
    n: int

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.upper - self.lower)


def tail_from_samples(total: np.ndarray, threshold: float) -> TailEstimate:
    n = len(total)
    count = int(np.sum(total > threshold))
    lo, hi = proportion_confint(count, n, alpha=0.05, method="wilson")
    return TailEstimate(float(threshold), count / n, float(lo), float(hi), n)


def empirical_tail(cell, traffic, plan, threshold, mobility: MobilityModel | None = None,
                   report: EstimateReport | None = None) -> TailEstimate:
    """``P(J_A + J_B > threshold)`` with a Wilson 95% interval.

    Pass ``report`` (with JTotal samples) to reuse an earlier simulation.
    """
    if report is None:
        mobility = MobilityModel.motionless() if mobility is None else mobility
        report = simulate(cell, traffic, mobility, replace(plan, outputs=("JA", "JTotal")))
    return tail_from_samples(report.samples["JTotal"], threshold)
