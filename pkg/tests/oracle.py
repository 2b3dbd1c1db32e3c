"""Independent reference computations: plain coefficient lists and mpmath
at 60 digits, no code shared with the library."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

import mpmath

mpmath.mp.dps = 60

Weight = Callable[[int], mpmath.mpf]


def wbs_step(x: dict[int, mpmath.mpf], w: Weight) -> dict[int, mpmath.mpf]:
    """B_w: entry at a moves to a - 1 with factor w(a); e_0 is annihilated."""
    return {a - 1: c * w(a) for a, c in x.items() if a >= 1}


def wfs_step(x: dict[int, mpmath.mpf], w: Weight) -> dict[int, mpmath.mpf]:
    """F_w: entry at a moves to a + 1 with factor w(a)."""
    return {a + 1: c * w(a) for a, c in x.items()}


def lp_norm(x: dict[int, mpmath.mpf], p: float = 2.0, v: Weight = lambda i: mpmath.mpf(1)) -> mpmath.mpf:
    if not x:
        return mpmath.mpf(0)
    return mpmath.fsum(abs(c) ** p * v(i) for i, c in x.items()) ** (mpmath.mpf(1) / p)


def c0_norm(x: dict[int, mpmath.mpf], v: Weight = lambda i: mpmath.mpf(1)) -> mpmath.mpf:
    return max((abs(c) * v(i) for i, c in x.items()), default=mpmath.mpf(0))


def orbit_norms(x: dict[int, float], w: Weight, N: int, step=wbs_step, norm=lp_norm) -> list[mpmath.mpf]:
    cur = {i: mpmath.mpf(c) for i, c in x.items() if c != 0}
    out = []
    for _ in range(N + 1):
        out.append(norm(cur))
        cur = step(cur, w)
    return out


def matrix_orbit_norms(M: Sequence[Sequence[float]], x: Sequence[float], N: int) -> list[mpmath.mpf]:
    A = mpmath.matrix([[mpmath.mpf(a) for a in r] for r in M])
    v = mpmath.matrix([mpmath.mpf(a) for a in x])
    out = []
    for _ in range(N + 1):
        out.append(mpmath.norm(v, 2))
        v = A * v
    return out


def union_count(runs: Sequence[tuple[int, int]], n: int) -> int:
    """card(union of [a, b) intersected with [1, n])."""
    return sum(max(0, min(b, n + 1) - max(a, 1)) for a, b in runs)


def dyadic_even_count(n: int) -> int:
    """card(A intersected with [1, n]) for A = union_k [4^k, 2 * 4^k), in closed form."""
    total, k = 0, 0
    while 4**k <= n:
        total += min(n + 1, 2 * 4**k) - 4**k
        k += 1
    return total


def density_ratio(count: int, n: int) -> Fraction:
    return Fraction(count, n)


def binomial_norm(i: int, j: int, w: Callable[[int], mpmath.mpf]) -> mpmath.mpf:
    """||(I + B_w)^i e_j|| on l^2, B_w e_{n+1} = w_n e_n, by exact binomials."""
    s = mpmath.mpf(0)
    prod = mpmath.mpf(1)
    for k in range(min(i, j) + 1):
        if k:
            prod *= w(j - k)
        s += (mpmath.binomial(i, k) * prod) ** 2
    return mpmath.sqrt(s)


# -- oscillating block weights with peak 2, trough decay 1/2 ----------------------
# log2 of the running product w_0 ... w_{i-1}: pair k climbs k + 1 steps from
# -k to 1, then falls k + 2 steps to -(k + 1); pair k starts at k^2 + 2k.


def zigzag_level(i: int) -> int:
    from math import isqrt

    k = isqrt(i + 1) - 1
    t = i - (k * k + 2 * k)
    return -k + t if t <= k + 1 else 1 - (t - (k + 1))


def zigzag_orbit_norm(u: dict[int, mpmath.mpf], n: int) -> mpmath.mpf:
    """||F_w^n u|| on l^2 for the zigzag weights, entries at distinct indices."""
    two = mpmath.mpf(2)
    return mpmath.sqrt(mpmath.fsum((c * two ** (zigzag_level(a + n) - zigzag_level(a))) ** 2 for a, c in u.items()))
