"""Stationary ON/OFF traffic: trajectories, occupation times and their moments."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import expm


class TrafficKind(str, Enum):
    EXPONENTIAL = "exponential_on_off"
    ALWAYS_ON = "always_on"


class MomentMethod(str, Enum):
    ANALYTIC = "analytic"
    EXACT = "exact"
    MONTE_CARLO = "montecarlo"
    ASYMPTOTIC = "asymptotic"


class UnsupportedOrderError(ValueError):
    pass


@dataclass(frozen=True)
class TrafficModel:
    """Two-state Markov traffic started in its stationary law.

    ``mu_on`` ends ON periods (mean ON duration ``1/mu_on``), ``mu_off`` ends
    OFF periods.
    """

    kind: TrafficKind = TrafficKind.EXPONENTIAL
    mu_on: float = 1.0
    mu_off: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TrafficKind(self.kind))
        if self.kind is TrafficKind.EXPONENTIAL:
            for name in ("mu_on", "mu_off"):
                value = getattr(self, name)
                if not (value > 0 and math.isfinite(value)):
                    raise ValueError(f"{name} must be positive, got {value}")

    @classmethod
    def always_on(cls) -> "TrafficModel":
        return cls(TrafficKind.ALWAYS_ON)

    @property
    def pi_on(self) -> float:
        if self.kind is TrafficKind.ALWAYS_ON:
            return 1.0
        return self.mu_off / (self.mu_on + self.mu_off)

    @property
    def pi_off(self) -> float:
        return 1.0 - self.pi_on

    @property
    def switching_rate(self) -> float:
        """Stationary mean number of state changes per second."""
        if self.kind is TrafficKind.ALWAYS_ON:
            return 0.0
        return self.pi_on * self.mu_on + self.pi_off * self.mu_off


@dataclass(frozen=True)
class TrafficTrajectory:
    """Piecewise-constant ON/OFF path on ``[0, horizon]``."""

    initial_on: bool
    switch_times: np.ndarray
    horizon: float

    def __post_init__(self):
        st = np.asarray(self.switch_times, dtype=float)
        if st.size and (np.any(np.diff(st) <= 0) or st[0] <= 0 or st[-1] >= self.horizon):
            raise ValueError("switch times must be strictly increasing inside (0, horizon)")
        object.__setattr__(self, "switch_times", st)

    def state(self, t):
        """1.0 when ON at time ``t``, else 0.0 (right-continuous)."""
        flips = np.searchsorted(self.switch_times, t, side="right")
        return np.where((flips % 2 == 0) == self.initial_on, 1.0, 0.0)

    def on_intervals(self) -> list[tuple[float, float]]:
        edges = np.concatenate(([0.0], self.switch_times, [self.horizon]))
        first = 0 if self.initial_on else 1
        return [(edges[j], edges[j + 1]) for j in range(first, len(edges) - 1, 2)]

    def integrate(self) -> float:
        return integrate_activity(self)


@dataclass(frozen=True)
class TrafficBatch:
    """Independent trajectories for ``size`` users, switch times padded with inf."""

    initial_on: np.ndarray  # (N,) bool
    switch_times: np.ndarray  # (N, K) float, +inf past the last switch
    horizon: float

    @property
    def size(self) -> int:
        return len(self.initial_on)

    def __len__(self):
        return self.size

    def __getitem__(self, i) -> TrafficTrajectory:
        st = self.switch_times[i]
        return TrafficTrajectory(bool(self.initial_on[i]), st[np.isfinite(st)], self.horizon)

    def subset(self, idx) -> "TrafficBatch":
        return TrafficBatch(self.initial_on[idx], self.switch_times[idx], self.horizon)

    def _segments(self):
        n, k = self.switch_times.shape
        edges = np.empty((n, k + 2))
        edges[:, 0] = 0.0
        edges[:, 1:-1] = np.minimum(self.switch_times, self.horizon)
        edges[:, -1] = self.horizon
        parity = (np.arange(k + 1) % 2 == 0)
        on = parity[None, :] == self.initial_on[:, None]
        return edges[:, :-1], edges[:, 1:], on

    def on_time(self) -> np.ndarray:
        """Exact ``int_0^T A(t) dt`` for every trajectory."""
        start, end, on = self._segments()
        return np.where(on, end - start, 0.0).sum(axis=1)

    def on_intervals(self):
        """Flattened ON intervals: ``(user_index, start, end)`` arrays of positive length."""
        start, end, on = self._segments()
        keep = on & (end > start)
        users = np.broadcast_to(np.arange(self.size)[:, None], keep.shape)[keep]
        return users, start[keep], end[keep]


def sample_trajectories(model: TrafficModel, horizon: float, size: int,
                        rng: np.random.Generator) -> TrafficBatch:
    """Sample ``size`` independent stationary trajectories on ``[0, horizon]``."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if model.kind is TrafficKind.ALWAYS_ON or size == 0:
        initial = np.ones(size, dtype=bool) if model.kind is TrafficKind.ALWAYS_ON else np.zeros(0, bool)
        return TrafficBatch(initial, np.empty((size, 0)), horizon)
    initial = rng.random(size) < model.pi_on
    mean_switches = horizon * max(model.mu_on, model.mu_off)
    width = int(mean_switches + 6 * math.sqrt(mean_switches) + 4)
    # column j is a holding time in state initial XOR (j odd)
    scale_on, scale_off = 1.0 / model.mu_on, 1.0 / model.mu_off
    blocks, offset = [], np.zeros(size)
    col = 0
    while True:
        draws = rng.standard_exponential((size, width))
        in_on = ((np.arange(col, col + width) % 2 == 0)[None, :] == initial[:, None])
        times = offset[:, None] + np.cumsum(draws * np.where(in_on, scale_on, scale_off), axis=1)
        blocks.append(times)
        offset = times[:, -1]
        col += width
        if np.all(offset >= horizon):
            break
    times = np.concatenate(blocks, axis=1) if len(blocks) > 1 else blocks[0]
    times[times >= horizon] = np.inf
    used = int(np.isfinite(times).sum(axis=1).max()) if size else 0
    return TrafficBatch(initial, np.ascontiguousarray(times[:, :used]), horizon)


def sample_trajectory(model: TrafficModel, horizon: float, rng: np.random.Generator) -> TrafficTrajectory:
    return sample_trajectories(model, horizon, 1, rng)[0]


def integrate_activity(traj: TrafficTrajectory, horizon: float | None = None) -> float:
    """Total ON time of ``traj`` over ``[0, horizon]`` (no quadrature)."""
    horizon = traj.horizon if horizon is None else horizon
    edges = np.concatenate(([0.0], traj.switch_times[traj.switch_times < horizon], [horizon]))
    lengths = np.diff(edges)
    return float(lengths[0 if traj.initial_on else 1::2].sum())


def _exact_moment(model: TrafficModel, k: int, horizon: float) -> float:
    # E[X^k] = k! pi^T [exp(M T)]_{0,k} 1 with M block bidiagonal (Q on the
    # diagonal, D = diag(1, 0) above it); states ordered (ON, OFF).
    q = np.array([[-model.mu_on, model.mu_on], [model.mu_off, -model.mu_off]])
    d = np.diag([1.0, 0.0])
    big = np.zeros((2 * (k + 1), 2 * (k + 1)))
    for i in range(k + 1):
        big[2 * i:2 * i + 2, 2 * i:2 * i + 2] = q
        if i < k:
            big[2 * i:2 * i + 2, 2 * i + 2:2 * i + 4] = d
    block = expm(big * horizon)[0:2, 2 * k:2 * k + 2]
    pi = np.array([model.pi_on, model.pi_off])
    return float(math.factorial(k) * pi @ block @ np.ones(2))


def analytic_second_moment(model: TrafficModel, horizon: float) -> float:
    """``E[(int_0^T A)^2]`` from the stationary covariance ``pi_on pi_off exp(-theta |t-s|)``."""
    p = model.pi_on
    if model.kind is TrafficKind.ALWAYS_ON:
        return horizon**2
    theta = model.mu_on + model.mu_off
    return (p * horizon) ** 2 + 2 * p * (1 - p) * (
        horizon / theta - (-math.expm1(-theta * horizon)) / theta**2)


def traffic_moment(model: TrafficModel, k: int, horizon: float,
                   method: MomentMethod | str = MomentMethod.ANALYTIC, *,
                   samples: int = 100_000, rng: np.random.Generator | None = None,
                   chunk: int = 20_000) -> tuple[float, float]:
    """``m_k[A, T] = E[(int_0^T A(s) ds)^k]`` and its standard error.

    ``analytic`` covers k <= 2; ``exact`` evaluates any order through a
    matrix exponential; ``asymptotic`` returns ``(pi_on T)^k``; ``montecarlo``
    averages ``samples`` simulated trajectories.
    """
    method = MomentMethod(method)
    if k < 1 or int(k) != k:
        raise ValueError(f"order must be a positive integer, got {k}")
    if model.kind is TrafficKind.ALWAYS_ON:
        return float(horizon) ** k, 0.0
    if method is MomentMethod.ASYMPTOTIC:
        return (model.pi_on * horizon) ** k, 0.0
    if method is MomentMethod.ANALYTIC:
        if k == 1:
            return model.pi_on * horizon, 0.0
        if k == 2:
            return analytic_second_moment(model, horizon), 0.0
        raise UnsupportedOrderError(f"no closed form for order {k}; use 'exact' or 'montecarlo'")
    if method is MomentMethod.EXACT:
        return _exact_moment(model, int(k), horizon), 0.0
    rng = np.random.default_rng() if rng is None else rng
    total = total_sq = 0.0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        x = sample_trajectories(model, horizon, size, rng).on_time() ** k
        total += math.fsum(x)
        total_sq += math.fsum(x * x)
        done += size
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0) * samples / max(samples - 1, 1)
    return mean, math.sqrt(var / samples)


def traffic_moments(model: TrafficModel, n: int, horizon: float, method="auto", **kw) -> list[float]:
    """``[m_1, ..., m_n]``; ``auto`` uses closed forms up to order 2, then ``exact``."""
    out = []
    for k in range(1, n + 1):
        m = method
        if method == "auto":
            m = MomentMethod.ANALYTIC if k <= 2 else MomentMethod.EXACT
        out.append(traffic_moment(model, k, horizon, m, **kw)[0])
    return out
