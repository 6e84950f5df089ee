"""Scenario configuration: path-loss family, link budget and the cell itself.

Units are fixed throughout the package: meters, seconds, milliwatts, and
energies in mW*s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

C_LIGHT = 299_792_458.0  # m/s


class PathLossDomainError(ValueError):
    """Raised when the singular path loss is evaluated at the base station."""


class PathLossKind(str, Enum):
    SINGULAR = "singular"
    CLIPPED = "clipped"
    SMOOTH = "smooth"


@dataclass(frozen=True)
class PathLoss:
    """Isotropic path loss ``l(x) = L(|x|)``.

    ``singular``: ``|x|**-gamma``; ``clipped``: ``max(r0, |x|)**-gamma``;
    ``smooth``: ``1 / (1 + |x|**gamma)``.
    """

    kind: PathLossKind = PathLossKind.SINGULAR
    gamma: float = 3.0
    r0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PathLossKind(self.kind))
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.kind is PathLossKind.CLIPPED:
            if self.r0 is None or not self.r0 > 0:
                raise ValueError("clipped path loss needs r0 > 0")
        elif self.r0 is not None:
            raise ValueError(f"r0 only applies to the clipped kind, not {self.kind.value}")

    def inv_radial(self, u):
        """Attenuation factor ``1 / L(u)`` for distances ``u >= 0`` (vectorized)."""
        u = np.asarray(u, dtype=float)
        if self.kind is PathLossKind.SINGULAR:
            if np.any(u == 0):
                raise PathLossDomainError("singular path loss is undefined at the origin")
            out = u**self.gamma
        elif self.kind is PathLossKind.CLIPPED:
            out = np.maximum(self.r0, u) ** self.gamma
        else:
            out = 1.0 + u**self.gamma
        return out if out.ndim else float(out)

    def radial(self, u):
        """``L(u)``, the received-power fraction at distance ``u``."""
        return 1.0 / np.asarray(self.inv_radial(u))

    def power_integral(self, radius: float, k: float) -> float:
        """Exact ``int_{|x|<=radius} (1/l(x))**k dx``."""
        g = self.gamma
        if self.kind is PathLossKind.SINGULAR:
            return 2 * math.pi * radius ** (g * k + 2) / (g * k + 2)
        if self.kind is PathLossKind.CLIPPED:
            r0 = self.r0
            if radius <= r0:
                return math.pi * radius**2 * r0 ** (g * k)
            return (math.pi * r0 ** (g * k + 2)
                    + 2 * math.pi * (radius ** (g * k + 2) - r0 ** (g * k + 2)) / (g * k + 2))
        if float(k) != int(k) or k < 0:
            raise ValueError("smooth path loss integral needs a non-negative integer power")
        k = int(k)
        return sum(math.comb(k, j) * 2 * math.pi * radius ** (g * j + 2) / (g * j + 2)
                   for j in range(k + 1))


def pathloss_inv(pl: PathLoss, x) -> float | np.ndarray:
    """``1 / l(x)`` for a point (or array of points, last axis of size 2)."""
    x = np.asarray(x, dtype=float)
    return pl.inv_radial(np.hypot(x[..., 0], x[..., 1]))


@dataclass(frozen=True)
class LinkBudget:
    """Receiver sensitivities and radio constants.

    ``duplex_factor`` is the 2 in ``beta_A = 2 * p_min_rx / K`` (uplink plus
    downlink); override only to explore alternatives.
    """

    p_min_rx: float = 1e-9  # mW
    p_min_beacon: float = 1e-8  # mW
    frequency_hz: float = 2e9
    d_ref: float = 1.0  # m
    duplex_factor: float = 2.0
    c_light: float = field(default=C_LIGHT, repr=False)

    def __post_init__(self):
        for name in ("p_min_rx", "p_min_beacon", "frequency_hz", "d_ref", "duplex_factor"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    def k_constant(self, gamma: float) -> float:
        return (self.c_light / (4 * math.pi * self.frequency_hz * self.d_ref)) ** 2 * self.d_ref**gamma


def beta_constants(budget: LinkBudget, gamma: float) -> tuple[float, float]:
    """Return ``(beta_A, beta_B)`` for the given path-loss exponent."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    k = budget.k_constant(gamma)
    return budget.duplex_factor * budget.p_min_rx / k, budget.p_min_beacon / k


@dataclass(frozen=True)
class CellConfig:
    """One isolated circular cell of radius ``radius`` centred on the base station."""

    radius: float
    density: float
    pathloss: PathLoss = field(default_factory=PathLoss)
    budget: LinkBudget = field(default_factory=LinkBudget)
    horizon: float = 3600.0

    def __post_init__(self):
        for name in ("radius", "density", "horizon"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @property
    def gamma(self) -> float:
        return self.pathloss.gamma

    @property
    def mean_users(self) -> float:
        """Mean number of users in the cell, ``lambda * pi * R**2``."""
        return self.density * math.pi * self.radius**2

    def mean_active(self, traffic) -> float:
        return self.mean_users * traffic.pi_on

    @property
    def betas(self) -> tuple[float, float]:
        return beta_constants(self.budget, self.gamma)

    @property
    def beta_a(self) -> float:
        return self.betas[0]

    @property
    def beta_b(self) -> float:
        return self.betas[1]

    def with_radius(self, radius: float) -> "CellConfig":
        return replace(self, radius=radius)

    def with_mean_users(self, n: float) -> "CellConfig":
        """Same radius, density rescaled so that the mean user count is ``n``."""
        return replace(self, density=n / (math.pi * self.radius**2))
