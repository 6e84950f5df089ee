"""Mobility marks: continuous paths started at the origin."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class MobilityKind(str, Enum):
    MOTIONLESS = "motionless"
    CONSTANT_VELOCITY = "constant_velocity"


@dataclass(frozen=True)
class SpeedDistribution:
    """Uniform speed on ``[low, high]`` m/s; ``low == high`` is a fixed speed."""

    low: float
    high: float

    def __post_init__(self):
        if not (0 <= self.low <= self.high and math.isfinite(self.high)):
            raise ValueError(f"need 0 <= low <= high < inf, got [{self.low}, {self.high}]")

    @classmethod
    def fixed(cls, speed: float) -> "SpeedDistribution":
        return cls(speed, speed)

    @property
    def is_fixed(self) -> bool:
        return self.low == self.high

    @property
    def cap(self) -> float:
        return self.high

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if self.is_fixed:
            return np.full(size, self.low)
        return rng.uniform(self.low, self.high, size)


@dataclass(frozen=True)
class MotionPath:
    """``t -> base_velocity * t / epsilon``: a straight path, possibly accelerated."""

    base_velocity: tuple[float, float] = (0.0, 0.0)
    epsilon: float = 1.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        v = np.asarray(self.base_velocity)
        out = np.multiply.outer(t / self.epsilon, v)
        return out

    @property
    def velocity(self) -> np.ndarray:
        return np.asarray(self.base_velocity) / self.epsilon

    @property
    def speed(self) -> float:
        return float(np.hypot(*self.base_velocity)) / self.epsilon

    @property
    def direction(self) -> float:
        return math.atan2(self.base_velocity[1], self.base_velocity[0])


@dataclass(frozen=True)
class MobilityModel:
    """Law of the per-user motion mark.

    ``epsilon`` < 1 gives the accelerated model ``t -> M(t / epsilon)``.
    Directions are uniform on the circle.
    """

    kind: MobilityKind = MobilityKind.MOTIONLESS
    speed: SpeedDistribution | None = None
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", MobilityKind(self.kind))
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.kind is MobilityKind.CONSTANT_VELOCITY and self.speed is None:
            raise ValueError("constant-velocity mobility needs a speed distribution")
        if self.kind is MobilityKind.MOTIONLESS and self.speed is not None:
            raise ValueError("motionless mobility takes no speed distribution")

    @classmethod
    def motionless(cls) -> "MobilityModel":
        return cls()

    @classmethod
    def constant_velocity(cls, low: float, high: float | None = None, epsilon: float = 1.0) -> "MobilityModel":
        return cls(MobilityKind.CONSTANT_VELOCITY,
                   SpeedDistribution(low, low if high is None else high), epsilon)

    @property
    def is_static(self) -> bool:
        return self.kind is MobilityKind.MOTIONLESS or self.speed.cap == 0

    @property
    def property_t(self) -> bool:
        """True when ``P(M(s) = M(t)) = 0`` for every ``s != t``."""
        if self.kind is MobilityKind.MOTIONLESS:
            return False
        return not (self.speed.is_fixed and self.speed.low == 0)

    @property
    def v_cap(self) -> float:
        """Hard cap on the effective speed, acceleration included."""
        return 0.0 if self.is_static else self.speed.cap / self.epsilon

    def accelerated(self, epsilon: float) -> "MobilityModel":
        return replace(self, epsilon=self.epsilon * epsilon)

    def sample_velocities(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Effective velocity vectors, shape ``(size, 2)``."""
        if self.kind is MobilityKind.MOTIONLESS:
            return np.zeros((size, 2))
        speed = self.speed.sample(size, rng) / self.epsilon
        angle = rng.uniform(0.0, 2 * math.pi, size)
        return np.column_stack((speed * np.cos(angle), speed * np.sin(angle)))


def sample_motion(model: MobilityModel, rng: np.random.Generator) -> MotionPath:
    v = model.sample_velocities(1, rng)[0] * model.epsilon
    return MotionPath((float(v[0]), float(v[1])), model.epsilon)
