"""Rule-based infinite positive sequences (explicit prefix + closed-form tail).

All quantities are natural logs.  A sequence ``s`` with prefix length ``P``
has ``log s_i = prefix[i]`` for ``i < P`` and ``log s_i = tail.log_at(i - P)``
afterwards.  Tails work in *offsets* ``j = i - P``.

Cumulative sums ``C(t) = sum_{i<t} log s_i`` are what orbit norms of shifts
are made of.  The block tail evaluates them from integer occurrence counts
and an exact rational dot product, so indices far beyond 2**63 are fine.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

from .logreal import NEG_INF, LogReal, to_decimal

INF_RUN: Optional[int] = None  # run length "infinite"


def _check_finite_log(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{what} must be a finite log-magnitude, got {x!r}")
    return x


def _min_run(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


# ---------------------------------------------------------------------------
# tails
# ---------------------------------------------------------------------------


class Tail(ABC):
    kind: str = ""

    @abstractmethod
    def log_at(self, j: int) -> float: ...

    @abstractmethod
    def log_range(self, a: int, b: int) -> float:
        """sum of log values over offsets a <= j < b (0 if a >= b)."""

    @abstractmethod
    def const_run(self, j: int) -> Optional[int]:
        """Number of offsets j, j+1, ... sharing the value at j (None: forever)."""

    @abstractmethod
    def const_run_back(self, j: int) -> int:
        """Number of offsets j, j-1, ..., >= 0 sharing the value at j."""

    def delta_run(self, j: int) -> Optional[int]:
        """Number of consecutive differences d_j, d_{j+1}, ... equal to d_j,
        where d_j = log s_{j+1} - log s_j.  May underestimate, never over."""
        return 1

    def delta_run_back(self, j: int) -> int:
        """Number of consecutive d_j, d_{j-1}, ..., d_0 equal to d_j."""
        return 1

    @abstractmethod
    def log_sup(self, j0: int = 0) -> float:
        """sup of log s over offsets >= j0 (may be +inf)."""

    @abstractmethod
    def log_inf(self, j0: int = 0) -> float:
        """inf of log s over offsets >= j0 (may be -inf)."""

    @abstractmethod
    def trend(self) -> str:
        """Direction of log s in j: 'const', 'inc', 'dec' or 'periodic'."""

    @abstractmethod
    def params(self) -> dict[str, Any]: ...

    def first_cum_below(self, j0: int, thr: float, sign: int = 1) -> Optional[int]:
        """Smallest j >= j0 with sign*(sum_{j0<=i<j} log s_i) < thr, or None.

        Generic version for tails whose log values are monotone in j: the
        partial sum is then unimodal and a galloping search is exact.
        """
        return _first_below_monotone(self, j0, thr, sign)


def _first_below_monotone(tail: Tail, j0: int, thr: float, sign: int) -> Optional[int]:
    if 0.0 < thr:
        return j0
    ell = lambda j: sign * tail.log_at(j)  # noqa: E731
    S = lambda j: sign * tail.log_range(j0, j)  # noqa: E731
    trend = tail.trend()
    if trend == "const":
        step = ell(j0)
        if step >= 0:
            return None
        # smallest n with n*step < thr
        n = math.floor(thr / step) + 1
        n = max(n, 0)
        while n > 0 and S(j0 + n - 1) < thr:
            n -= 1
        while not S(j0 + n) < thr:
            n += 1
        return j0 + n
    inc = (trend == "inc") == (sign > 0)
    # ell is monotone: increasing if inc.  S decreases exactly where ell < 0.
    if inc:
        # ell < 0 on a prefix [j0, z); S minimal at z
        if ell(j0) >= 0:
            return None
        lo, hi = j0, j0 + 1
        while ell(hi) < 0:
            lo, hi = hi, j0 + 2 * (hi - j0)
            if hi - j0 > 1 << 62:
                hi = None  # never turns positive; S decreasing forever
                break
        if hi is None:
            return _gallop_first(S, j0, thr)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ell(mid) < 0:
                lo = mid
            else:
                hi = mid
        z = hi  # S(z) = min
        if not S(z) < thr:
            return None
        return _bisect_first(S, j0, z, thr)
    # ell decreasing: S increases then decreases
    lo = j0
    if ell(j0) >= 0:
        hi = j0 + 1
        while ell(hi) >= 0:
            hi = j0 + 2 * (hi - j0)
            if hi - j0 > 1 << 62:
                return None
        a, b = j0, hi
        while b - a > 1:
            mid = (a + b) // 2
            if ell(mid) >= 0:
                a = mid
            else:
                b = mid
        lo = b
    return _gallop_first(S, lo, thr)


def _gallop_first(S: Callable[[int], float], lo: int, thr: float) -> Optional[int]:
    """S non-increasing on [lo, inf): smallest j >= lo with S(j) < thr."""
    if S(lo) < thr:
        return lo
    d = 1
    while not S(lo + d) < thr:
        d *= 2
        if d > 1 << 80:
            return None
    return _bisect_first(S, lo + d // 2, lo + d, thr)


def _bisect_first(S: Callable[[int], float], lo: int, hi: int, thr: float) -> int:
    """S non-increasing on [lo, hi], S(hi) < thr: smallest j in [lo, hi]."""
    if S(lo) < thr:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if S(mid) < thr:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class ConstantTail(Tail):
    log_c: float
    kind: str = field(default="Constant", init=False)

    def __post_init__(self) -> None:
        _check_finite_log(self.log_c, "constant")

    def log_at(self, j: int) -> float:
        return self.log_c

    def log_range(self, a: int, b: int) -> float:
        return (b - a) * self.log_c if b > a else 0.0

    def const_run(self, j: int) -> Optional[int]:
        return INF_RUN

    def const_run_back(self, j: int) -> int:
        return j + 1

    def delta_run(self, j: int) -> Optional[int]:
        return INF_RUN

    def delta_run_back(self, j: int) -> int:
        return j + 1

    def log_sup(self, j0: int = 0) -> float:
        return self.log_c

    def log_inf(self, j0: int = 0) -> float:
        return self.log_c

    def trend(self) -> str:
        return "const"

    def params(self) -> dict[str, Any]:
        return {"log_c": to_decimal(self.log_c)}


@dataclass(frozen=True)
class GeometricTail(Tail):
    """s_{P+j} = scale * ratio**j."""

    log_ratio: float
    log_scale: float = 0.0
    kind: str = field(default="Geometric", init=False)

    def __post_init__(self) -> None:
        _check_finite_log(self.log_ratio, "ratio")
        _check_finite_log(self.log_scale, "scale")

    def log_at(self, j: int) -> float:
        return self.log_scale + j * self.log_ratio

    def log_range(self, a: int, b: int) -> float:
        if b <= a:
            return 0.0
        n = b - a
        # sum_{j=a}^{b-1} j = n*(a+b-1)/2; n*(n+2a-1) is always even
        return n * self.log_scale + (n * (a + b - 1) // 2) * self.log_ratio

    def const_run(self, j: int) -> Optional[int]:
        return INF_RUN if self.log_ratio == 0.0 else 1

    def const_run_back(self, j: int) -> int:
        return j + 1 if self.log_ratio == 0.0 else 1

    def delta_run(self, j: int) -> Optional[int]:
        return INF_RUN

    def delta_run_back(self, j: int) -> int:
        return j + 1

    def log_sup(self, j0: int = 0) -> float:
        if self.log_ratio > 0:
            return math.inf
        return self.log_at(j0)

    def log_inf(self, j0: int = 0) -> float:
        if self.log_ratio < 0:
            return NEG_INF
        return self.log_at(j0)

    def trend(self) -> str:
        if self.log_ratio == 0.0:
            return "const"
        return "inc" if self.log_ratio > 0 else "dec"

    def params(self) -> dict[str, Any]:
        return {"log_ratio": to_decimal(self.log_ratio), "log_scale": to_decimal(self.log_scale)}


@dataclass(frozen=True)
class PowerLawTail(Tail):
    """s_i = scale * (i + offset)**exponent, with i the absolute index.

    ``start`` is the absolute index of offset 0 (the prefix length); it is
    filled in by WeightSequence.
    """

    exponent: float
    log_scale: float = 0.0
    offset: float = 0.0
    start: int = 0
    kind: str = field(default="PowerLaw", init=False)

    def __post_init__(self) -> None:
        _check_finite_log(self.exponent, "exponent")
        _check_finite_log(self.log_scale, "scale")
        if not self.start + self.offset > 0:
            raise ValueError(
                f"power-law base i+offset must be positive from index {self.start}"
            )

    def _base(self, j: int) -> float:
        return self.start + j + self.offset

    def log_at(self, j: int) -> float:
        return self.log_scale + self.exponent * math.log(self._base(j))

    def log_range(self, a: int, b: int) -> float:
        if b <= a:
            return 0.0
        n = b - a
        if n <= 64:
            s = math.fsum(math.log(self._base(j)) for j in range(a, b))
        else:
            # sum log(x) for x = x0, x0+1, ..., x0+n-1
            x0 = self._base(a)
            s = math.lgamma(x0 + n) - math.lgamma(x0)
        return n * self.log_scale + self.exponent * s

    def const_run(self, j: int) -> Optional[int]:
        return INF_RUN if self.exponent == 0.0 else 1

    def const_run_back(self, j: int) -> int:
        return j + 1 if self.exponent == 0.0 else 1

    def delta_run(self, j: int) -> Optional[int]:
        return INF_RUN if self.exponent == 0.0 else 1

    def delta_run_back(self, j: int) -> int:
        return j + 1 if self.exponent == 0.0 else 1

    def log_sup(self, j0: int = 0) -> float:
        if self.exponent > 0:
            return math.inf
        return self.log_at(j0)

    def log_inf(self, j0: int = 0) -> float:
        if self.exponent < 0:
            return NEG_INF
        return self.log_at(j0)

    def trend(self) -> str:
        if self.exponent == 0.0:
            return "const"
        return "inc" if self.exponent > 0 else "dec"

    def params(self) -> dict[str, Any]:
        return {
            "exponent": to_decimal(self.exponent),
            "log_scale": to_decimal(self.log_scale),
            "offset": to_decimal(self.offset),
        }


def _first_int_below_quadratic(
    a: Fraction, b: Fraction, c: Fraction, thr: Fraction, k_lo: int
) -> Optional[int]:
    """Smallest integer K >= k_lo with a K^2 + b K + c < thr, exactly."""
    q = lambda K: (a * K + b) * K + c  # noqa: E731
    if q(k_lo) < thr:
        return k_lo

    def gallop_decreasing(lo: int) -> Optional[int]:
        # q non-increasing on [lo, inf)
        d = 1
        while not q(lo + d) < thr:
            d *= 2
            if d > 1 << 200:
                return None
        L, H = lo + d // 2, lo + d
        while H - L > 1:
            mid = (L + H) // 2
            if q(mid) < thr:
                H = mid
            else:
                L = mid
        return H

    if a == 0:
        if b >= 0:
            return None
        return gallop_decreasing(k_lo)
    vertex = -b / (2 * a)
    if a > 0:
        # decreasing on (-inf, vertex], increasing after
        hi = math.floor(vertex)
        if hi < k_lo:
            return None  # q increasing on [k_lo, inf) and q(k_lo) >= thr
        best = hi if q(hi) <= q(hi + 1) else hi + 1
        if not q(best) < thr:
            return None
        L, H = k_lo, best
        while H - L > 1:
            mid = (L + H) // 2
            if q(mid) < thr:
                H = mid
            else:
                L = mid
        return H
    # a < 0: increasing up to vertex, then decreasing forever
    start = max(k_lo, math.ceil(vertex))
    return gallop_decreasing(start)


@dataclass(frozen=True)
class BlockRunLengthTail(Tail):
    """Periodic pattern of constant-value blocks with linearly growing lengths.

    Period K (K = 0, 1, ...) consists of segments s = 0..S-1, segment s
    holding the value exp(log_values[s]) repeated base[s] + slope[s]*K times.
    """

    log_values: tuple[float, ...]
    base: tuple[int, ...]
    slope: tuple[int, ...]
    kind: str = field(default="BlockRunLength", init=False)

    def __post_init__(self) -> None:
        S = len(self.log_values)
        if S == 0 or len(self.base) != S or len(self.slope) != S:
            raise ValueError("log_values, base and slope must have equal positive length")
        for x in self.log_values:
            _check_finite_log(x, "block value")
        if any(int(b) != b or b < 0 for b in self.base) or any(int(s) != s or s < 0 for s in self.slope):
            raise ValueError("block lengths must be non-negative integers")
        if sum(self.base) < 1:
            raise ValueError("period 0 must have positive length")
        object.__setattr__(self, "base", tuple(int(b) for b in self.base))
        object.__setattr__(self, "slope", tuple(int(s) for s in self.slope))
        object.__setattr__(self, "_fr", tuple(Fraction(x) for x in self.log_values))

    # -- period geometry ------------------------------------------------
    @property
    def _A(self) -> int:
        return sum(self.base)

    @property
    def _B(self) -> int:
        return sum(self.slope)

    def period_start(self, K: int) -> int:
        return self._A * K + self._B * (K * (K - 1) // 2)

    def seg_len(self, K: int, s: int) -> int:
        return self.base[s] + self.slope[s] * K

    def period_of(self, j: int) -> int:
        if j < 0:
            raise ValueError("negative offset")
        A, B = self._A, self._B
        if B == 0:
            K = j // A
        else:
            # B K^2 + (2A - B) K - 2j <= 0
            b = 2 * A - B
            disc = b * b + 8 * B * j
            K = (math.isqrt(disc) - b) // (2 * B)
            K = max(K, 0)
        while self.period_start(K + 1) <= j:
            K += 1
        while self.period_start(K) > j:
            K -= 1
        return K

    def locate(self, j: int) -> tuple[int, int, int, int]:
        """(K, s, seg_lo, seg_hi): offset j lies in segment s = [seg_lo, seg_hi)."""
        K = self.period_of(j)
        lo = self.period_start(K)
        for s in range(len(self.log_values)):
            hi = lo + self.seg_len(K, s)
            if j < hi:
                return K, s, lo, hi
            lo = hi
        raise AssertionError("offset not located")  # pragma: no cover

    def counts(self, j: int) -> list[int]:
        """Occurrences of each segment value among offsets < j."""
        if j <= 0:
            return [0] * len(self.log_values)
        K, s, lo, _ = self.locate(j)
        tri = K * (K - 1) // 2
        out = [self.base[t] * K + self.slope[t] * tri for t in range(len(self.base))]
        for t in range(s):
            out[t] += self.seg_len(K, t)
        out[s] += j - lo
        return out

    def cum_exact(self, j: int) -> Fraction:
        return sum((c * f for c, f in zip(self.counts(j), self._fr)), Fraction(0))  # type: ignore[attr-defined]

    # -- Tail interface -------------------------------------------------
    def log_at(self, j: int) -> float:
        return self.log_values[self.locate(j)[1]]

    def log_range(self, a: int, b: int) -> float:
        if b <= a:
            return 0.0
        ca, cb = self.counts(a), self.counts(b)
        return float(sum(((y - x) * f for x, y, f in zip(ca, cb, self._fr)), Fraction(0)))  # type: ignore[attr-defined]

    def const_run(self, j: int) -> Optional[int]:
        _, _, _, hi = self.locate(j)
        n = hi - j
        # neighbouring segments may carry the same value; merge them
        while True:
            K2, s2, lo2, hi2 = self.locate(j + n)
            if self.log_values[s2] != self.log_values[self.locate(j)[1]]:
                return n
            n += hi2 - lo2
            if n > 1 << 70:
                return INF_RUN

    def const_run_back(self, j: int) -> int:
        v = self.log_at(j)
        _, _, lo, _ = self.locate(j)
        n = j - lo + 1
        while lo > 0:
            _, s2, lo2, _ = self.locate(lo - 1)
            if self.log_values[s2] != v:
                break
            n += lo - lo2
            lo = lo2
        return n

    def delta_run(self, j: int) -> Optional[int]:
        if self.log_at(j + 1) != self.log_at(j):
            return 1
        r = self.const_run(j)
        return None if r is None else r - 1

    def delta_run_back(self, j: int) -> int:
        if self.log_at(j + 1) != self.log_at(j):
            return 1
        return self.const_run_back(j)

    def log_sup(self, j0: int = 0) -> float:
        K = self.period_of(j0)
        return max(v for s, v in enumerate(self.log_values) if self.base[s] + self.slope[s] * (K + 1) > 0)

    def log_inf(self, j0: int = 0) -> float:
        K = self.period_of(j0)
        return min(v for s, v in enumerate(self.log_values) if self.base[s] + self.slope[s] * (K + 1) > 0)

    def trend(self) -> str:
        return "periodic"

    def params(self) -> dict[str, Any]:
        return {
            "log_values": [to_decimal(x) for x in self.log_values],
            "base": list(self.base),
            "slope": list(self.slope),
        }

    def period_log_sum(self, K: int) -> Fraction:
        return sum((self.seg_len(K, s) * f for s, f in enumerate(self._fr)), Fraction(0))  # type: ignore[attr-defined]

    def first_cum_below(self, j0: int, thr: float, sign: int = 1) -> Optional[int]:
        fr = [sign * f for f in self._fr]  # type: ignore[attr-defined]
        T = Fraction(thr)
        c0 = sum((c * f for c, f in zip(self.counts(j0), fr)), Fraction(0))
        # work with absolute cumulative D(j) = sign*C(j); want D(j) - c0 < T
        target = T + c0

        def D(j: int) -> Fraction:
            return sum((c * f for c, f in zip(self.counts(j), fr)), Fraction(0))

        def scan_period(K: int, j_from: int) -> Optional[int]:
            lo = self.period_start(K)
            for s in range(len(fr)):
                hi = lo + self.seg_len(K, s)
                if hi > j_from or s == len(fr) - 1:
                    a = max(lo, j_from)
                    Da = D(a)
                    if Da < target:
                        return a
                    if fr[s] < 0 and hi > a:
                        # D(a + n) = Da + n*fr[s]; smallest n with value < target
                        n = math.floor((Da - target) / (-fr[s])) + 1
                        if a + n <= hi:
                            return a + n
                lo = hi
            return None

        K0 = self.period_of(j0)
        hit = scan_period(K0, j0)
        if hit is not None:
            return hit
        # boundary values f_s(K) = D(start of segment s in period K) are
        # quadratic in K; a period can only dip below target at a boundary.
        best: Optional[int] = None
        for s in range(len(fr)):
            a2 = Fraction(0)
            b1 = Fraction(0)
            c = Fraction(0)
            for t, f in enumerate(fr):
                # count_t = base_t K + slope_t K(K-1)/2 (+ seg len if t < s)
                a2 += f * Fraction(self.slope[t], 2)
                b1 += f * (self.base[t] - Fraction(self.slope[t], 2))
                if t < s:
                    b1 += f * self.slope[t]
                    c += f * self.base[t]
            K = _first_int_below_quadratic(a2, b1, c, target, K0 + 1)
            if K is not None and (best is None or K < best):
                best = K
        # period ends are period starts of the next period: covered by s=0
        if best is None:
            return None
        return scan_period(best, self.period_start(best))


TAIL_KINDS = {
    "Constant": ConstantTail,
    "Geometric": GeometricTail,
    "PowerLaw": PowerLawTail,
    "BlockRunLength": BlockRunLengthTail,
}


# ---------------------------------------------------------------------------
# weight sequence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunsTail(Tail):
    """Finitely many constant runs, then one value forever.

    Run r holds exp(log_values[r]) for lengths[r] consecutive offsets; after
    the last run every offset holds exp(log_final).  Suited to staged block
    designs whose lengths grow faster than linearly.
    """

    log_values: tuple[float, ...]
    lengths: tuple[int, ...]
    log_final: float
    kind: str = field(default="Runs", init=False)

    def __post_init__(self) -> None:
        if len(self.log_values) != len(self.lengths):
            raise ValueError("log_values and lengths must have equal length")
        for x in self.log_values + (self.log_final,):
            _check_finite_log(x, "run value")
        if any(int(n) != n or n < 1 for n in self.lengths):
            raise ValueError("run lengths must be positive integers")
        object.__setattr__(self, "lengths", tuple(int(n) for n in self.lengths))
        ends = []
        acc = 0
        for n in self.lengths:
            acc += n
            ends.append(acc)
        object.__setattr__(self, "_ends", tuple(ends))

    @property
    def total(self) -> int:
        return self._ends[-1] if self._ends else 0  # type: ignore[attr-defined]

    def locate(self, j: int) -> tuple[int, int, Optional[int]]:
        """(run index or -1 for the final value, start, end or None)."""
        import bisect

        r = bisect.bisect_right(self._ends, j)  # type: ignore[attr-defined]
        if r >= len(self.lengths):
            return -1, self.total, None
        start = self._ends[r - 1] if r else 0  # type: ignore[attr-defined]
        return r, start, self._ends[r]  # type: ignore[attr-defined]

    def _value(self, r: int) -> float:
        return self.log_final if r < 0 else self.log_values[r]

    def log_at(self, j: int) -> float:
        return self._value(self.locate(j)[0])

    def log_range(self, a: int, b: int) -> float:
        if b <= a:
            return 0.0
        parts = []
        j = a
        while j < b:
            r, _, end = self.locate(j)
            stop = b if end is None else min(b, end)
            parts.append((stop - j) * self._value(r))
            j = stop
        return math.fsum(parts)

    def const_run(self, j: int) -> Optional[int]:
        r, _, end = self.locate(j)
        if end is None:
            return INF_RUN
        v = self._value(r)
        n = end - j
        while True:
            r2, _, end2 = self.locate(j + n)
            if self._value(r2) != v:
                return n
            if end2 is None:
                return INF_RUN
            n = end2 - j

    def const_run_back(self, j: int) -> int:
        r, start, _ = self.locate(j)
        v = self._value(r)
        n = j - start + 1
        while start > 0:
            r2, start2, _ = self.locate(start - 1)
            if self._value(r2) != v:
                break
            n += start - start2
            start = start2
        return n

    def delta_run(self, j: int) -> Optional[int]:
        if self.log_at(j + 1) != self.log_at(j):
            return 1
        r = self.const_run(j)
        return None if r is None else r - 1

    def delta_run_back(self, j: int) -> int:
        if self.log_at(j + 1) != self.log_at(j):
            return 1
        return self.const_run_back(j)

    def log_sup(self, j0: int = 0) -> float:
        r, _, _ = self.locate(j0)
        rest = [] if r < 0 else list(self.log_values[r:])
        return max(rest + [self.log_final])

    def log_inf(self, j0: int = 0) -> float:
        r, _, _ = self.locate(j0)
        rest = [] if r < 0 else list(self.log_values[r:])
        return min(rest + [self.log_final])

    def trend(self) -> str:
        return "runs"

    def params(self) -> dict[str, Any]:
        return {
            "log_values": [to_decimal(x) for x in self.log_values],
            "lengths": [str(n) for n in self.lengths],
            "log_final": to_decimal(self.log_final),
        }

    def compressed(self) -> list[tuple[float, Optional[int]]]:
        """(log value, length) per run; the final run has length None."""
        return [(v, n) for v, n in zip(self.log_values, self.lengths)] + [(self.log_final, None)]

    def first_cum_below(self, j0: int, thr: float, sign: int = 1) -> Optional[int]:
        S = 0.0
        j = j0
        while True:
            if S < thr:
                return j
            r, _, end = self.locate(j)
            s = sign * self._value(r)
            room = None if end is None else end - j
            if s < 0:
                t = max(math.floor((thr - S) / s) + 1, 1)
                if room is None or t <= room:
                    # settle float rounding at the boundary
                    while t > 1 and S + sign * self.log_range(j, j + t - 1) < thr:
                        t -= 1
                    while not S + sign * self.log_range(j, j + t) < thr:
                        t += 1
                    if room is None or t <= room:
                        return j + t
            if room is None:
                return None
            S += sign * self.log_range(j, end)  # type: ignore[arg-type]
            j = end  # type: ignore[assignment]


@dataclass(frozen=True)
class WeightSequence:
    prefix: tuple[float, ...]
    tail: Tail

    def __post_init__(self) -> None:
        pre = tuple(_check_finite_log(x, "prefix entry") for x in self.prefix)
        object.__setattr__(self, "prefix", pre)
        if isinstance(self.tail, PowerLawTail) and self.tail.start != len(pre):
            object.__setattr__(
                self,
                "tail",
                PowerLawTail(self.tail.exponent, self.tail.log_scale, self.tail.offset, len(pre)),
            )
        cum = [0.0]
        for x in pre:
            cum.append(cum[-1] + x)
        object.__setattr__(self, "_cum", tuple(cum))

    # -- convenience constructors ----------------------------------------
    @classmethod
    def constant(cls, c: float, prefix: Sequence[float] = ()) -> WeightSequence:
        return cls(tuple(math.log(x) for x in prefix), ConstantTail(math.log(c)))

    @classmethod
    def geometric(cls, ratio: float, scale: float = 1.0, prefix: Sequence[float] = ()) -> WeightSequence:
        return cls(tuple(math.log(x) for x in prefix), GeometricTail(math.log(ratio), math.log(scale)))

    @classmethod
    def power_law(
        cls, exponent: float, scale: float = 1.0, offset: float = 0.0, prefix: Sequence[float] = ()
    ) -> WeightSequence:
        pre = tuple(math.log(x) for x in prefix)
        return cls(pre, PowerLawTail(exponent, math.log(scale), offset, len(pre)))

    @classmethod
    def blocks(
        cls,
        values: Sequence[float],
        base: Sequence[int],
        slope: Sequence[int],
        prefix: Sequence[float] = (),
    ) -> WeightSequence:
        return cls(
            tuple(math.log(x) for x in prefix),
            BlockRunLengthTail(tuple(math.log(v) for v in values), tuple(base), tuple(slope)),
        )

    @classmethod
    def runs(
        cls,
        values: Sequence[float],
        lengths: Sequence[int],
        final: float = 1.0,
        prefix: Sequence[float] = (),
    ) -> WeightSequence:
        return cls(
            tuple(math.log(x) for x in prefix),
            RunsTail(tuple(math.log(v) for v in values), tuple(lengths), math.log(final)),
        )

    # -- pointwise -------------------------------------------------------
    @property
    def P(self) -> int:
        return len(self.prefix)

    def log_at(self, i: int) -> float:
        if i < 0:
            raise IndexError(f"negative index {i}")
        if i < self.P:
            return self.prefix[i]
        return self.tail.log_at(i - self.P)

    def __getitem__(self, i: int) -> LogReal:
        return LogReal.from_log(self.log_at(i))

    def logs(self, a: int, b: int) -> list[float]:
        return [self.log_at(i) for i in range(a, b)]

    def log_range(self, a: int, b: int) -> float:
        """sum_{a <= i < b} log s_i (0.0 when a >= b)."""
        if b <= a:
            return 0.0
        P = self.P
        total = 0.0
        if a < P:
            total += self._cum[min(b, P)] - self._cum[a]  # type: ignore[attr-defined]
        if b > P:
            total += self.tail.log_range(max(a, P) - P, b - P)
        return total

    # -- runs --------------------------------------------------------------
    def const_run(self, i: int) -> Optional[int]:
        """Length of the run of equal values starting at i and going up."""
        P = self.P
        if i >= P:
            return self.tail.const_run(i - P)
        v = self.prefix[i]
        n = 1
        while i + n < P and self.prefix[i + n] == v:
            n += 1
        if i + n == P and self.tail.log_at(0) == v:
            r = self.tail.const_run(0)
            return None if r is None else n + r
        return n

    def const_run_back(self, i: int) -> int:
        """Length of the run of equal values ending at i going down (>= 1)."""
        P = self.P
        v = self.log_at(i)
        if i >= P:
            n = self.tail.const_run_back(i - P)
            if n < i - P + 1:
                return n
            j = P - 1
        else:
            n = 1
            j = i - 1
        while j >= 0 and self.prefix[j] == v:
            n += 1
            j -= 1
        return n

    def delta(self, k: int) -> float:
        return self.log_at(k + 1) - self.log_at(k)

    def delta_run(self, k: int) -> Optional[int]:
        """Consecutive differences delta(k), delta(k+1), ... equal to delta(k)
        (None: forever).  Conservative: never overestimates."""
        P = self.P
        if k >= P:
            return self.tail.delta_run(k - P)
        d = self.delta(k)
        n = 1
        while k + n < P and self.delta(k + n) == d:
            n += 1
        if k + n == P and self.delta(P) == d:
            r = self.tail.delta_run(0)
            return None if r is None else n + r
        return n

    def delta_run_back(self, k: int) -> int:
        """Consecutive differences delta(k), delta(k-1), ..., delta(0) equal
        to delta(k)."""
        P = self.P
        d = self.delta(k)
        if k >= P:
            n = self.tail.delta_run_back(k - P)
            if n < k - P + 1:
                return n
            j = P - 1
        else:
            n = 1
            j = k - 1
        while j >= 0 and self.delta(j) == d:
            n += 1
            j -= 1
        return n

    # -- global properties -------------------------------------------------
    def log_sup(self, i0: int = 0) -> float:
        vals = [x for x in self.prefix[i0:]]
        t = self.tail.log_sup(max(0, i0 - self.P))
        return max(vals + [t])

    def log_inf(self, i0: int = 0) -> float:
        vals = [x for x in self.prefix[i0:]]
        t = self.tail.log_inf(max(0, i0 - self.P))
        return min(vals + [t])

    def log_ratio_sup(self) -> float:
        """log sup_i s_i / s_{i+1}, from the rule (may be +inf)."""
        P = self.P
        best = NEG_INF
        for i in range(P):
            best = max(best, self.log_at(i) - self.log_at(i + 1))
        t = self.tail
        if isinstance(t, ConstantTail):
            best = max(best, 0.0)
        elif isinstance(t, GeometricTail):
            best = max(best, -t.log_ratio)
        elif isinstance(t, PowerLawTail):
            # ratio (x/(x+1))^alpha is monotone in x; the limit is 1
            best = max(best, t.log_at(0) - t.log_at(1), 0.0)
        elif isinstance(t, RunsTail):
            comp = t.compressed()
            best = max(best, 0.0, *(a - b for (a, _), (b, _) in zip(comp, comp[1:])))
        elif isinstance(t, BlockRunLengthTail):
            S = len(t.log_values)
            best = max(best, 0.0)
            for K in (0, 1, 2):
                lo = t.period_start(K)
                for s in range(S):
                    hi = lo + t.seg_len(K, s)
                    if hi > lo:
                        best = max(best, t.log_at(hi - 1) - t.log_at(hi))
                    lo = hi
        return best

    def first_cumlog_below(self, origin: int, thr: float, start: int, sign: int = 1) -> Optional[int]:
        """Smallest t >= start with sign * log_range(origin, t) < thr."""
        if start < origin:
            raise ValueError("start must be >= origin")
        P = self.P
        t = start
        base = sign * self.log_range(origin, t)
        while t < P:
            if base < thr:
                return t
            base += sign * self.prefix[t]
            t += 1
        if base < thr:
            return t
        hit = self.tail.first_cum_below(t - P, thr - base, sign)
        return None if hit is None else hit + P

    def first_cumlog_above(self, origin: int, thr: float, start: int) -> Optional[int]:
        """Smallest t >= start with log_range(origin, t) > thr."""
        return self.first_cumlog_below(origin, -thr, start, sign=-1)

    # -- serialization -------------------------------------------------------
    def to_json(self) -> dict[str, Any]:
        return {
            "prefix": [to_decimal(x) for x in self.prefix],
            "tail": {"kind": self.tail.kind, "params": self.tail.params()},
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> WeightSequence:
        from ..errors import SchemaError

        try:
            prefix = tuple(float(x) for x in d["prefix"])
            kind = d["tail"]["kind"]
            p = d["tail"].get("params", {})
            if kind == "Constant":
                tail: Tail = ConstantTail(float(p["log_c"]))
            elif kind == "Geometric":
                tail = GeometricTail(float(p["log_ratio"]), float(p.get("log_scale", 0.0)))
            elif kind == "PowerLaw":
                tail = PowerLawTail(
                    float(p["exponent"]), float(p.get("log_scale", 0.0)), float(p.get("offset", 0.0)), len(prefix)
                )
            elif kind == "BlockRunLength":
                tail = BlockRunLengthTail(
                    tuple(float(x) for x in p["log_values"]),
                    tuple(int(x) for x in p["base"]),
                    tuple(int(x) for x in p["slope"]),
                )
            elif kind == "Runs":
                tail = RunsTail(
                    tuple(float(x) for x in p["log_values"]),
                    tuple(int(x) for x in p["lengths"]),
                    float(p["log_final"]),
                )
            else:
                raise SchemaError(f"unknown tail kind {kind!r}")
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad weight sequence: {exc}") from exc
        return cls(prefix, tail)
