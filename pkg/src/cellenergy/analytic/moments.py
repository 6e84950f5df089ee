"""Closed-form moments of the additive and broadcast energies."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from ..model import CellConfig, PathLossKind
from ..traffic import MomentMethod, TrafficModel, traffic_moment, traffic_moments
from .bell import bell_polynomials

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8


class QuadratureError(ArithmeticError):
    pass


def _quad(func, a, b, **kw):
    with np.errstate(all="ignore"):
        val, err, *info = integrate.quad(func, a, b, epsabs=kw.pop("epsabs", QUAD_EPSABS),
                                         epsrel=kw.pop("epsrel", QUAD_EPSREL), limit=kw.pop("limit", 200),
                                         full_output=1, **kw)
    if len(info) > 1 and info[1]:
        # quad sets a message only on trouble; tolerate it if the error estimate is still tight
        if not (err <= max(QUAD_EPSABS, 1e-6 * abs(val))):
            raise QuadratureError(f"quadrature did not converge on [{a}, {b}]: {info[1]} (err={err:g})")
    return val


@dataclass
class MomentReport:
    """Raw moments ``E[X^k]`` for ``k`` in ``orders``."""

    orders: list[int]
    values: list[float]
    provenance: str = "analytic"
    formula_refs: list[str] = field(default_factory=list)

    def __post_init__(self):
        if list(self.orders) != sorted(self.orders):
            raise ValueError("orders must be ascending")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("moments must be finite")

    def moment(self, k: int) -> float:
        return self.values[self.orders.index(k)]

    @property
    def mean(self) -> float:
        return self.moment(1)

    @property
    def variance(self) -> float | None:
        if 2 not in self.orders:
            return None
        return max(self.moment(2) - self.mean**2, 0.0)

    @property
    def skewness(self) -> float | None:
        if 3 not in self.orders or not self.variance:
            return None
        m1, m2, m3 = self.moment(1), self.moment(2), self.moment(3)
        return (m3 - 3 * m1 * m2 + 2 * m1**3) / self.variance**1.5

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(mean=self.mean, variance=self.variance)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def campbell_moments(f_powers: Sequence[float], provenance="analytic", refs=()) -> MomentReport:
    """Moments of ``F = sum_x f(x)`` from ``[int f dnu, ..., int f^n dnu]``."""
    f_powers = [float(v) for v in f_powers]
    b = bell_polynomials(f_powers)
    n = len(f_powers)
    return MomentReport(list(range(1, n + 1)), [float(v) for v in b[1:]], provenance,
                        list(refs) or ["campbell"])


def additive_cumulants(cell: CellConfig, traffic: TrafficModel, n: int,
                       traffic_method="auto", **kw) -> list[float]:
    """``alpha_k = lambda beta_A^k m_k[A,T] int_C (1/l)^k dx`` for ``k = 1..n``."""
    beta_a = cell.beta_a
    m = traffic_moments(traffic, n, cell.horizon, traffic_method, **kw)
    return [cell.density * beta_a**k * m[k - 1] * cell.pathloss.power_integral(cell.radius, k)
            for k in range(1, n + 1)]


def ja_moments_motionless(cell: CellConfig, traffic: TrafficModel, n: int,
                          traffic_method="auto", **kw) -> MomentReport:
    """Raw moments of the additive energy when users do not move."""
    if n < 1:
        raise ValueError("need at least one order")
    alphas = additive_cumulants(cell, traffic, n, traffic_method, **kw)
    prov = "montecarlo" if traffic_method == MomentMethod.MONTE_CARLO else "analytic"
    return campbell_moments(alphas, prov, ["campbell", "additive-motionless"])


def ja_mean_singular(cell: CellConfig, traffic: TrafficModel) -> float:
    """``2 beta_A / (gamma + 2) * rho * R**gamma * T``."""
    g = cell.gamma
    return 2 * cell.beta_a / (g + 2) * cell.mean_active(traffic) * cell.radius**g * cell.horizon


@dataclass(frozen=True)
class MaxDistanceLaw:
    """Law of the distance from the base station to its farthest in-cell user.

    An empty cell is an atom of mass ``exp(-n)`` placed at distance 0.
    """

    radius: float
    density: float

    @property
    def mean_users(self) -> float:
        return self.density * math.pi * self.radius**2

    @property
    def empty_mass(self) -> float:
        return math.exp(-self.mean_users)

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        lp = self.density * math.pi
        inside = (u >= 0) & (u <= self.radius)
        out = np.where(inside, 2 * lp * u * np.exp(lp * (np.minimum(u, self.radius) ** 2 - self.radius**2)), 0.0)
        return out if out.ndim else float(out)

    def cdf(self, u):
        """``P(delta <= u)``, empty cell included."""
        u = np.clip(np.asarray(u, dtype=float), 0.0, self.radius)
        out = np.exp(self.density * math.pi * (u**2 - self.radius**2))
        return out if out.ndim else float(out)

    def cdf_nonempty(self, u):
        e = self.empty_mass
        return (np.asarray(self.cdf(u)) - e) / (1 - e)


def max_distance_density(cell: CellConfig) -> MaxDistanceLaw:
    return MaxDistanceLaw(cell.radius, cell.density)


def jb_no_power_control(cell: CellConfig) -> float:
    """Beacon energy with fixed power covering the cell edge, ``beta_B / L(R) * T``."""
    return cell.beta_b * cell.pathloss.inv_radial(cell.radius) * cell.horizon


def jb_moments_power_control(cell: CellConfig, k: int) -> float:
    """``E[J_B^k]`` under beacon power control, by quadrature against the max-distance law."""
    if k < 1:
        raise ValueError("order must be >= 1")
    law = max_distance_density(cell)
    pl = cell.pathloss
    n = law.mean_users
    # f_delta concentrates within ~R/(2n) of the edge for large n
    points = sorted({cell.radius * math.sqrt(max(0.0, 1 - j / n)) for j in (0.5, 2, 8, 32)} - {0.0, cell.radius})

    def integrand(u):
        if u == 0:
            return 0.0
        return pl.inv_radial(u) ** k * law.pdf(u)

    val = _quad(integrand, 0.0, cell.radius, points=points or None)
    return (cell.beta_b * cell.horizon) ** k * val


def power_control_gain(mean_users: float, gamma: float) -> float:
    """``E[J_B] / J_B^0`` for the singular path loss: ``e^-n n^(-g/2) int_0^n v^(g/2) e^v dv``."""
    n = mean_users
    if n <= 0:
        raise ValueError("mean user count must be positive")
    h = gamma / 2
    val = _quad(lambda v: math.exp(h * math.log(v) + v - n) if v > 0 else 0.0, 0.0, n,
                points=[p for p in (n - 1, n - 5, n - 20) if 0 < p < n] or None)
    return val * n ** (-h)


def kappa(cell: CellConfig, traffic: TrafficModel, factor2: bool = True) -> float:
    """Ratio of the mean additive energy to the fixed beacon energy.

    ``factor2=False`` drops the duplex factor carried by ``beta_A`` (the
    ``rho * P_rx / P_beacon`` convention).
    """
    mean_ja = (cell.density * cell.beta_a * traffic.pi_on * cell.horizon
               * cell.pathloss.power_integral(cell.radius, 1))
    k = mean_ja / jb_no_power_control(cell)
    if not factor2:
        k /= cell.budget.duplex_factor
    return k


def _f_power_integrals(cell: CellConfig, traffic: TrafficModel, orders, mode) -> dict[int, float]:
    T = cell.horizon
    out = {}
    for k in orders:
        if mode == "asymptotic":
            mk = (traffic.pi_on * T) ** k
        else:
            method = MomentMethod.ANALYTIC if k <= 2 else MomentMethod.EXACT
            mk = traffic_moment(traffic, k, T, method)[0]
        out[k] = cell.density * cell.beta_a**k * mk * cell.pathloss.power_integral(cell.radius, k)
    return out


def m_ratio(k: float, cell: CellConfig, traffic: TrafficModel, mode: str = "finite") -> float:
    """Standardised integral ratio ``(int f^2 dnu)^(-k/2) int |f|^k dnu``.

    ``f(x, a) = beta_A / l(x) * int_0^T a``.  ``mode='asymptotic'`` replaces
    ``m_k[A,T]`` by ``(pi_on T)^k``; ``'finite'`` uses exact occupation moments.
    """
    if mode not in ("finite", "asymptotic"):
        raise ValueError(f"unknown mode {mode!r}")
    ints = _f_power_integrals(cell, traffic, (2, k), mode)
    return ints[2] ** (-k / 2) * ints[k]


def m_ratio_at_unit_density(k: float, cell: CellConfig, traffic: TrafficModel, mode="finite") -> float:
    """The same ratio with the intensity replaced by 1 user per m^2."""
    return m_ratio(k, cell, traffic, mode) * cell.density ** (k / 2 - 1)
