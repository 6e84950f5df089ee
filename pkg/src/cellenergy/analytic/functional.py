"""Moment functionals of the additive energy for mobile users.

For a user with velocity ``v`` the time integral
``g(x) = int_0^T f(x + v t) A(t) 1{x + v t in C} dt`` is integrated over the
plane.  ``f`` and ``C`` are rotation invariant, so ``v`` is rotated onto the
first axis and only its speed matters; the support of ``g`` is then the
stadium ``{(u, w): |w| < R, -sqrt(R^2-w^2) - sT < u < sqrt(R^2-w^2)}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..mobility import MobilityModel
from ..model import CellConfig
from ..traffic import TrafficModel, sample_trajectory
from .bell import bell_polynomials
from .moments import MomentReport


@dataclass
class FunctionalEstimate:
    orders: list[int]
    values: list[float]
    std_errors: list[float]
    quad_errors: list[float]
    draws: int
    evaluations: int
    partial: bool = False

    def moments(self, density: float) -> MomentReport:
        b = bell_polynomials([density * v for v in self.values])
        return MomentReport(list(self.orders), [float(x) for x in b[1:]], "montecarlo",
                            ["campbell", "mobility-functional"])


def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w  # nodes/weights on [0, 1]


def _chord_integral(z_lo, z_hi, w, inv_radial, t_nodes):
    """``int_{z_lo}^{z_hi} 1/L(sqrt(z^2 + w^2)) dz``, split at z = 0 (broadcasting)."""
    x, wt = _gl(t_nodes)
    total = 0.0
    for lo, hi in ((z_lo, np.minimum(z_hi, 0.0)), (np.maximum(z_lo, 0.0), z_hi)):
        length = np.maximum(hi - lo, 0.0)
        z = lo[..., None] + length[..., None] * x
        r = np.sqrt(z * z + (w**2)[..., None])
        total = total + length * (inv_radial(np.maximum(r, 1e-300)) @ wt)
    return total


def _stadium_integrals(radius, speed, horizon, on_intervals, switch_times, inv_radial, beta,
                       orders, w_nodes, u_nodes, t_nodes):
    """``int g^k du dw`` for one draw by composite Gauss-Legendre; returns (values, evals)."""
    phi_x, phi_w = np.polynomial.legendre.leggauss(w_nodes)
    phi = 0.5 * math.pi * phi_x
    w = radius * np.sin(phi)
    w_weight = 0.5 * math.pi * phi_w * radius * np.cos(phi)
    c = np.sqrt(np.maximum(radius**2 - w**2, 0.0))

    taus = np.concatenate(([0.0], switch_times, [horizon]))
    # g(., w) is smooth between these u-breakpoints
    brk = np.sort(np.concatenate((-c[:, None] - speed * taus, c[:, None] - speed * taus), axis=1), axis=1)
    ux, uw = _gl(u_nodes)
    lo, width = brk[:, :-1], np.diff(brk, axis=1)
    u = (lo[..., None] + width[..., None] * ux).reshape(len(w), -1)
    u_weight = (width[..., None] * uw).reshape(len(w), -1)

    p = np.array([a for a, _ in on_intervals])
    q = np.array([b for _, b in on_intervals])
    cc = c[:, None, None]
    z_lo = np.maximum(-cc, u[..., None] + speed * p)
    z_hi = np.minimum(cc, u[..., None] + speed * q)
    ww = np.broadcast_to(w[:, None, None], z_lo.shape)
    g = (beta / speed) * _chord_integral(z_lo, z_hi, ww, inv_radial, t_nodes).sum(axis=-1)
    weight = w_weight[:, None] * u_weight
    vals = [float(np.sum(weight * g**k)) for k in orders]
    return vals, z_lo.size * 2 * t_nodes


def _stadium_montecarlo(radius, speed, horizon, on_intervals, inv_radial, beta, orders,
                        points, t_nodes, rng):
    u = rng.uniform(-radius - speed * horizon, radius, points)
    w = rng.uniform(-radius, radius, points)
    area = (2 * radius + speed * horizon) * 2 * radius
    c = np.sqrt(np.maximum(radius**2 - w**2, 0.0))
    p = np.array([a for a, _ in on_intervals])
    q = np.array([b for _, b in on_intervals])
    z_lo = np.maximum(-c[:, None], u[:, None] + speed * p)
    z_hi = np.minimum(c[:, None], u[:, None] + speed * q)
    ww = np.broadcast_to(w[:, None], z_lo.shape)
    g = (beta / speed) * _chord_integral(z_lo, z_hi, ww, inv_radial, t_nodes).sum(axis=-1)
    return [float(area * np.mean(g**k)) for k in orders], z_lo.size * 2 * t_nodes


def mobility_functional(cell: CellConfig, traffic: TrafficModel, mobility: MobilityModel, n: int, *,
                        draws: int = 200, rng: np.random.Generator | None = None,
                        method: str = "quadrature", w_nodes: int = 24, u_nodes: int = 4,
                        t_nodes: int = 8, spatial_points: int = 4000, check_draws: int = 2,
                        budget: float = 5e9) -> FunctionalEstimate:
    """Estimate ``F_k = int E[(int_0^T f(x+M(t)) A(t) 1_C dt)^k] dx`` for ``k = 1..n``.

    ``f = beta_A / l``.  The expectation over traffic and speed is a plain
    Monte Carlo average over ``draws`` marks; the spatial integral uses
    quadrature (``method='quadrature'``) or uniform sampling of the stadium
    (``'montecarlo'``).  ``quad_errors`` compares the first ``check_draws``
    draws against a grid with doubled node counts.
    """
    if method not in ("quadrature", "montecarlo"):
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng() if rng is None else rng
    orders = list(range(1, n + 1))
    R, T, beta = cell.radius, cell.horizon, cell.beta_a
    inv = cell.pathloss.inv_radial
    static = [beta**k * cell.pathloss.power_integral(R, k) for k in orders]

    samples, qerr = [], np.zeros(n)
    evals, checked, partial = 0, 0, False
    for _ in range(draws):
        if evals > budget:
            partial = True
            break
        traj = sample_trajectory(traffic, T, rng)
        speed = 0.0 if mobility.is_static else float(mobility.speed.sample(1, rng)[0]) / mobility.epsilon
        on = traj.on_intervals()
        if speed == 0.0 or not on:
            x = traj.integrate()
            samples.append([x**k * s for k, s in zip(orders, static)])
            continue
        if method == "montecarlo":
            vals, e = _stadium_montecarlo(R, speed, T, on, inv, beta, orders, spatial_points, t_nodes, rng)
        else:
            args = (R, speed, T, on, traj.switch_times, inv, beta, orders)
            vals, e = _stadium_integrals(*args, w_nodes, u_nodes, t_nodes)
            if checked < check_draws:
                fine, e2 = _stadium_integrals(*args, 2 * w_nodes, 2 * u_nodes, 2 * t_nodes)
                qerr = np.maximum(qerr, np.abs(np.array(fine) - np.array(vals)))
                evals += e2
                checked += 1
        evals += e
        samples.append(vals)

    arr = np.asarray(samples, dtype=float).reshape(-1, n)
    m = len(arr)
    if m == 0:
        raise RuntimeError("evaluation budget exhausted before the first draw")
    means = arr.mean(axis=0)
    se = arr.std(axis=0, ddof=1) / math.sqrt(m) if m > 1 else np.full(n, np.inf)
    return FunctionalEstimate(orders, means.tolist(), se.tolist(), qerr.tolist(), m, evals, partial)
