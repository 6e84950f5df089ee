"""Complete Bell polynomials."""
from __future__ import annotations

from math import comb
from typing import Sequence


def bell_polynomials(a: Sequence) -> list:
    """``[B_0, B_1(a_1), ..., B_n(a_1..a_n)]`` for ``n = len(a)``.

    Uses ``B_{m+1} = sum_i C(m, i) B_{m-i} a_{i+1}`` with ``B_0 = 1``, so any
    numeric type closed under + and * works (floats, ints, Fractions, sympy).
    """
    out = [1]
    for m in range(len(a)):
        out.append(sum(comb(m, i) * out[m - i] * a[i] for i in range(m + 1)))
    return out


def bell_polynomial(n: int, a: Sequence):
    if n < 0:
        raise ValueError("order must be non-negative")
    if len(a) < n:
        raise ValueError(f"B_{n} needs {n} arguments, got {len(a)}")
    return bell_polynomials(list(a)[:n])[n]
