"""Homogeneous Poisson point processes with traffic and mobility marks."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple

import numpy as np

from .mobility import MobilityModel, MotionPath
from .traffic import TrafficBatch, TrafficModel, TrafficTrajectory, sample_trajectories


@dataclass(frozen=True)
class SeedLineage:
    """Identifies one random stream: ``(master_seed, replication, draw_counter)``.

    Streams are derived with ``SeedSequence`` spawn keys, so replication ``i``
    sees the same numbers whichever worker runs it.
    """

    master_seed: int
    replication: int = 0
    draw_counter: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.replication, self.draw_counter))
        return np.random.Generator(np.random.PCG64(seq))

    def advance(self) -> "SeedLineage":
        return replace(self, draw_counter=self.draw_counter + 1)


@dataclass(frozen=True)
class Disk:
    radius: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @property
    def bounds(self) -> tuple[float, float]:
        return 0.0, self.radius

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float) - self.center
        return np.hypot(pts[..., 0], pts[..., 1]) <= self.radius


@dataclass(frozen=True)
class Annulus:
    inner: float
    outer: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise ValueError("annulus needs 0 <= inner < outer")

    @property
    def area(self) -> float:
        return math.pi * (self.outer**2 - self.inner**2)

    @property
    def bounds(self) -> tuple[float, float]:
        return self.inner, self.outer

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float) - self.center
        r = np.hypot(pts[..., 0], pts[..., 1])
        return (r >= self.inner) & (r <= self.outer)


Window = Disk | Annulus


def uniform_in_window(window: Window, size: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = window.bounds
    r = np.sqrt(lo**2 + rng.random(size) * (hi**2 - lo**2))
    # exact zero radius has probability zero but breaks the singular path loss
    while np.any(r == 0):
        bad = r == 0
        r[bad] = np.sqrt(lo**2 + rng.random(bad.sum()) * (hi**2 - lo**2))
    angle = rng.uniform(0.0, 2 * math.pi, size)
    return np.column_stack((window.center[0] + r * np.cos(angle), window.center[1] + r * np.sin(angle)))


class User(NamedTuple):
    position0: np.ndarray
    traffic: TrafficTrajectory | None
    motion: MotionPath


@dataclass(frozen=True)
class MarkedConfiguration:
    """A finite marked point set stored column-wise.

    ``velocities`` are effective (acceleration applied); ``epsilon`` is kept
    only so per-user :class:`MotionPath` objects can be rebuilt.
    """

    positions: np.ndarray  # (N, 2)
    window: Window
    traffic: TrafficBatch | None = None
    velocities: np.ndarray | None = None  # (N, 2)
    epsilon: float = 1.0
    seed_lineage: SeedLineage | None = None

    def __len__(self):
        return len(self.positions)

    @property
    def users(self) -> Iterator[User]:
        for i in range(len(self)):
            v = np.zeros(2) if self.velocities is None else self.velocities[i] * self.epsilon
            yield User(self.positions[i],
                       None if self.traffic is None else self.traffic[i],
                       MotionPath((float(v[0]), float(v[1])), self.epsilon))

    def subset(self, idx) -> "MarkedConfiguration":
        return replace(self, positions=self.positions[idx],
                       traffic=None if self.traffic is None else self.traffic.subset(idx),
                       velocities=None if self.velocities is None else self.velocities[idx])

    def to_csv(self, path) -> None:
        """Columns: user_id, x_m, y_m, on_at_0, vx_mps, vy_mps."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["user_id", "x_m", "y_m", "on_at_0", "vx_mps", "vy_mps"])
            for i, (x, y) in enumerate(self.positions):
                on = "" if self.traffic is None else int(self.traffic.initial_on[i])
                vx, vy = (0.0, 0.0) if self.velocities is None else self.velocities[i]
                writer.writerow([i, repr(float(x)), repr(float(y)), on, repr(float(vx)), repr(float(vy))])


def sample_ppp(density: float, window: Window, rng: np.random.Generator,
               lineage: SeedLineage | None = None) -> MarkedConfiguration:
    """Poisson(``density * area``) points, iid uniform on ``window``."""
    if not (density > 0 and math.isfinite(density)):
        raise ValueError(f"density must be positive, got {density}")
    count = int(rng.poisson(density * window.area))
    return MarkedConfiguration(uniform_in_window(window, count, rng), window, seed_lineage=lineage)


def attach_marks(cfg: MarkedConfiguration, traffic: TrafficModel, mobility: MobilityModel,
                 horizon: float, rng: np.random.Generator) -> MarkedConfiguration:
    """Give every user an independent traffic trajectory and motion path."""
    n = len(cfg)
    batch = sample_trajectories(traffic, horizon, n, rng)
    velocities = mobility.sample_velocities(n, rng)
    return replace(cfg, traffic=batch, velocities=velocities, epsilon=mobility.epsilon)


def displace(cfg: MarkedConfiguration, t: float) -> np.ndarray:
    """Positions ``x + M_x(t)`` of all users at time ``t``."""
    if cfg.velocities is None:
        return cfg.positions.copy()
    return cfg.positions + cfg.velocities * t


def sampling_window(radius: float, mobility: MobilityModel, horizon: float) -> Disk:
    """Disk holding every user that can visit the cell before ``horizon``."""
    return Disk(radius + mobility.v_cap * horizon)
