"""Third-order Gaussian correction and its error bound."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from scipy.stats import norm


def hermite3(x):
    """``8x^3 - 12x``, the degree-3 Hermite polynomial used by the tail correction."""
    return 8 * x**3 - 12 * x


class TailProbability(NamedTuple):
    value: float
    raw: float
    clamped: bool


@dataclass(frozen=True)
class EdgeworthModel:
    """Corrected Gaussian law ``(1 + m3/6 * H3(x)) dmu(x)`` of the standardised functional."""

    m3: float
    error_bound: float = 0.0
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError("std must be positive")
        if self.error_bound < 0:
            raise ValueError("error bound must be non-negative")

    def tail(self, alpha: float) -> TailProbability:
        return edgeworth_tail(self, alpha)

    def exceedance(self, level: float) -> TailProbability:
        """Approximate ``P(F > level)`` on the original scale."""
        return edgeworth_tail(self, (level - self.mean) / self.std)


def tail_raw(m3: float, alpha: float) -> float:
    # int_alpha^inf H3 dmu = (8 alpha^2 + 4) phi(alpha)
    return float(norm.sf(alpha) + m3 / 6 * (8 * alpha**2 + 4) * norm.pdf(alpha))


def edgeworth_tail(model: EdgeworthModel, alpha: float) -> TailProbability:
    """``mu_3([alpha, inf))``, clamped to ``[0, 1]`` (the flag records clamping)."""
    raw = tail_raw(model.m3, alpha)
    value = min(max(raw, 0.0), 1.0)
    return TailProbability(value, raw, value != raw)


def approximation_error_bound(m3_at_1: float, m4_at_1: float, lam: float) -> float:
    if m3_at_1 < 0 or m4_at_1 < 0 or not lam > 0:
        raise ValueError("need non-negative ratios and positive intensity")
    return (m3_at_1**2 / 6 + m4_at_1 / 9 * math.sqrt(2 / math.pi)) / lam
