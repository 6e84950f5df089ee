"""Cell-radius optimisation and battery dimensioning."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .analytic.edgeworth import EdgeworthModel, approximation_error_bound, edgeworth_tail
from .analytic.moments import jb_no_power_control, kappa, m_ratio, m_ratio_at_unit_density
from .model import CellConfig, PathLossKind
from .traffic import MomentMethod, TrafficModel, traffic_moment

class PlanningError(ValueError):
    pass


class OptimizationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CostModel:
    """Deployment plus energy cost over a region of ``area`` m^2.

    ``kappa`` fixed means the mean user count per cell is held constant while
    R varies; ``kappa=None`` recomputes it from the cell density at each R.
    """

    area: float
    c1: float
    horizon: float
    kappa: float | None = None

    def __post_init__(self):
        if not (self.area > 0 and self.c1 >= 0 and self.horizon > 0):
            raise ValueError("need area > 0, c1 >= 0, horizon > 0")


def _kappa_at(cost: CostModel, cell: CellConfig, traffic: TrafficModel, radius: float) -> float:
    if cost.kappa is not None:
        return cost.kappa
    return kappa(cell.with_radius(radius), traffic)


def network_cost(cost: CostModel, cell: CellConfig, traffic: TrafficModel, radius: float) -> float:
    """``S (1 + kappa) beta_B T R^(gamma-2) + c1 S / R^2``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    g = cell.gamma
    k = _kappa_at(cost, cell, traffic, radius)
    return (cost.area * (1 + k) * cell.beta_b * cost.horizon * radius ** (g - 2)
            + cost.c1 * cost.area / radius**2)


def closed_form_radius(c1: float, gamma: float, kappa_value: float, beta_b_t: float) -> float:
    """Stationary point of the cost at constant kappa: ``(2 c1 / ((gamma - 2)(1 + kappa) beta_B T))^(1/gamma)``.

    Only exists for ``gamma > 2``; otherwise the energy term does not grow with R.
    """
    if not gamma > 2:
        raise PlanningError(f"no interior optimum for gamma={gamma} <= 2")
    return (2 * c1 / ((gamma - 2) * (1 + kappa_value) * beta_b_t)) ** (1 / gamma)


@dataclass
class RadiusResult:
    r_opt: float | None
    r_hat: float
    cost_at_opt: float
    kappa: float
    warnings: list[str] = field(default_factory=list)


def minimize_cost(func, lo: float = 1e-3, hi: float = 1e6, grid: int = 400) -> float:
    """Golden-section minimum of ``func`` over ``log R``, bracketed by a coarse scan."""
    logs = np.linspace(math.log(lo), math.log(hi), grid)
    vals = np.array([func(math.exp(s)) for s in logs])
    i = int(np.argmin(vals))
    if i == 0 or i == grid - 1:
        raise OptimizationError(f"cost minimum not bracketed inside [{lo}, {hi}] m")
    res = optimize.minimize_scalar(lambda s: func(math.exp(s)), bracket=(logs[i - 1], logs[i], logs[i + 1]),
                                   method="golden", tol=1e-12)
    return math.exp(res.x)


def optimal_radius(cost: CostModel, cell: CellConfig, traffic: TrafficModel,
                   bounds: tuple[float, float] = (1e-3, 1e6)) -> RadiusResult:
    """Closed-form optimum (constant kappa only) and a numerical minimiser for cross-checking."""
    if cell.pathloss.kind is not PathLossKind.SINGULAR:
        raise PlanningError("the cost model assumes the singular path loss")
    warnings = []
    r_opt = None
    if cost.kappa is not None:
        r_opt = closed_form_radius(cost.c1, cell.gamma, cost.kappa, cell.beta_b * cost.horizon)
    else:
        warnings.append("kappa recomputed at each radius: closed form not applicable")
    r_hat = minimize_cost(lambda r: network_cost(cost, cell, traffic, r), *bounds)
    best = r_opt if r_opt is not None else r_hat
    return RadiusResult(r_opt, r_hat, network_cost(cost, cell, traffic, best),
                        _kappa_at(cost, cell, traffic, best), warnings)


def cost_curve(cost: CostModel, cell: CellConfig, traffic: TrafficModel, radii) -> list[tuple[float, float]]:
    return [(float(r), network_cost(cost, cell, traffic, float(r))) for r in radii]


@dataclass
class BatterySpec:
    epsilon: float
    zeta: float  # additive part, mW*s
    zeta_total: float  # including the fixed beacon energy
    beacon: float
    alpha_star: float
    e_lambda: float
    m3: float
    m4: float
    mode: str
    reliable: bool = True
    out_of_validity: bool = False
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def solve_alpha(m3: float, epsilon: float, bracket=(-10.0, 10.0), xtol=1e-9) -> tuple[float, bool]:
    """Standardised level ``alpha`` with corrected tail ``= epsilon``; second value flags clamping."""
    model = EdgeworthModel(m3)
    f = lambda a: edgeworth_tail(model, a).value - epsilon
    lo, hi = bracket
    if f(lo) * f(hi) > 0:
        raise PlanningError(f"tail equation has no root in [{lo}, {hi}] for epsilon={epsilon}, m3={m3}")
    alpha = optimize.brentq(f, lo, hi, xtol=xtol)
    return alpha, edgeworth_tail(model, alpha).clamped


def dimension_battery(cell: CellConfig, traffic: TrafficModel, epsilon: float,
                      mode: str = "exact") -> BatterySpec:
    """Battery level with outage probability about ``epsilon`` over one horizon.

    ``mode='exact'`` uses exact occupation moments; ``'asymptotic'`` uses
    ``m_k[A,T] = (pi_on T)^k`` throughout.  Users are motionless and the
    beacon runs at fixed power.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if mode not in ("exact", "asymptotic"):
        raise ValueError(f"unknown mode {mode!r}")
    if cell.pathloss.kind is not PathLossKind.SINGULAR:
        raise PlanningError("battery dimensioning assumes the singular path loss")
    ratio_mode = "finite" if mode == "exact" else "asymptotic"
    m3 = m_ratio(3, cell, traffic, ratio_mode)
    m4 = m_ratio(4, cell, traffic, ratio_mode)
    e_lam = approximation_error_bound(m_ratio_at_unit_density(3, cell, traffic, ratio_mode),
                                      m_ratio_at_unit_density(4, cell, traffic, ratio_mode), cell.density)
    warnings, reliable = [], True
    if e_lam >= epsilon:
        warnings.append(f"error bound {e_lam:.3g} >= epsilon {epsilon:g}: result unreliable")
        reliable = False
    elif e_lam > epsilon / 10:
        warnings.append(f"error bound {e_lam:.3g} is not negligible against epsilon {epsilon:g}")
    alpha, clamped = solve_alpha(m3, epsilon)
    if clamped:
        warnings.append("corrected tail clamped at the root: approximation out of validity")

    T, g, n, R = cell.horizon, cell.gamma, cell.mean_users, cell.radius
    if mode == "exact":
        m1 = traffic_moment(traffic, 1, T, MomentMethod.ANALYTIC)[0]
        m2 = traffic_moment(traffic, 2, T, MomentMethod.ANALYTIC)[0]
    else:
        m1, m2 = traffic.pi_on * T, (traffic.pi_on * T) ** 2
    scale = cell.beta_a * R**g
    zeta = m1 * scale / (g / 2 + 1) * n + alpha * math.sqrt(m2) * scale / math.sqrt(g + 1) * math.sqrt(n)
    beacon = jb_no_power_control(cell)
    return BatterySpec(epsilon, zeta, zeta + beacon, beacon, alpha, e_lam, m3, m4, mode,
                       reliable, clamped, warnings)
