"""Orbit norm traces n -> log ||T^n x||.

A trace is stored as pieces on which the log-norm is affine in n.  For
shifts every support entry of x travels along the sequence picking up one
weight per step; while all entries see the same per-step factor the log-norm
is affine, so an orbit over 10**9 steps typically has only a handful of
pieces.  Other kinds are iterated densely (one piece per step).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

import numpy as np

from ..errors import ResourceLimitError, UnsupportedKind
from ..seqspace import NEG_INF, LogReal, SparseVector, cancellation_threshold, norm, to_decimal
from .apply import apply
from .spec import OperatorSpec

DEFAULT_BUDGET = 50_000_000
MAX_MATERIALIZE = 20_000_000


@dataclass(frozen=True, eq=False)
class OrbitRecord:
    operator: OperatorSpec
    seed: SparseVector
    horizon: int
    starts: np.ndarray  # int64, strictly increasing, starts[0] == 0
    values: np.ndarray  # log-norm at each piece start (-inf allowed)
    slopes: np.ndarray  # per-step increment inside a piece
    work: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if len(self.starts) == 0 or int(self.starts[0]) != 0:
            raise ValueError("orbit pieces must start at n = 0")

    # -- evaluation ----------------------------------------------------------
    @property
    def n_pieces(self) -> int:
        return len(self.starts)

    def piece_bounds(self, k: int) -> tuple[int, int]:
        """Piece k covers [a, b)."""
        a = int(self.starts[k])
        b = int(self.starts[k + 1]) if k + 1 < len(self.starts) else self.horizon + 1
        return a, b

    def _eval(self, k: int, n: int) -> float:
        v = float(self.values[k])
        if v == NEG_INF:
            return NEG_INF
        return v + float(self.slopes[k]) * (n - int(self.starts[k]))

    def lognorm_at(self, n: int) -> float:
        if not 0 <= n <= self.horizon:
            raise IndexError(f"n={n} outside [0, {self.horizon}]")
        k = int(np.searchsorted(self.starts, n, side="right")) - 1
        return self._eval(k, n)

    def lognorm(self, n: int) -> LogReal:
        return LogReal.from_log(self.lognorm_at(n))

    @property
    def lognorms(self) -> np.ndarray:
        """Dense array of log||T^n x||, n = 0..horizon."""
        if self.horizon + 1 > MAX_MATERIALIZE:
            raise ResourceLimitError(f"refusing to materialize {self.horizon + 1} log-norms")
        out = np.empty(self.horizon + 1)
        for k in range(self.n_pieces):
            a, b = self.piece_bounds(k)
            v = float(self.values[k])
            if v == NEG_INF:
                out[a:b] = NEG_INF
            else:
                out[a:b] = v + float(self.slopes[k]) * np.arange(b - a)
        return out

    def norms(self) -> list[LogReal]:
        return [LogReal.from_log(float(x)) for x in self.lognorms]

    # -- level sets ------------------------------------------------------------
    def _piece_interval(self, k: int, thr: float, below: bool) -> Optional[tuple[int, int]]:
        a, b = self.piece_bounds(k)
        v = float(self.values[k])
        g = float(self.slopes[k])
        test = (lambda n: self._eval(k, n) < thr) if below else (lambda n: self._eval(k, n) > thr)
        if v == NEG_INF or g == 0.0 or b - a == 1 or math.isinf(thr):
            return (a, b) if test(a) else None
        # the predicate holds on a prefix or a suffix of [a, b)
        suffix = (g < 0) == below
        if suffix:
            if not test(b - 1):
                return None
            t = math.floor((thr - v) / g) + 1
            n = min(max(a + t, a), b - 1)
            while n > a and test(n - 1):
                n -= 1
            while not test(n):
                n += 1
            return (n, b)
        if not test(a):
            return None
        t = math.ceil((thr - v) / g)
        n = min(max(a + t, a + 1), b)
        while n < b and test(n):
            n += 1
        while n > a + 1 and not test(n - 1):
            n -= 1
        return (a, n)

    def _dense(self) -> bool:
        return self.n_pieces == self.horizon + 1

    def _iter_intervals(self, thr: float, below: bool, lo: int, hi: int) -> Iterator[tuple[int, int]]:
        if self._dense():
            vals = self.values[lo : hi + 1]
            with np.errstate(invalid="ignore"):
                mask = vals < thr if below else vals > thr
            if not mask.any():
                return
            edges = np.flatnonzero(np.diff(np.concatenate(([0], mask.view(np.int8), [0]))))
            for a, b in zip(edges[0::2], edges[1::2]):
                yield lo + int(a), lo + int(b)
            return
        cur: Optional[tuple[int, int]] = None
        k0 = max(int(np.searchsorted(self.starts, lo, side="right")) - 1, 0)
        for k in range(k0, self.n_pieces):
            if int(self.starts[k]) > hi:
                break
            iv = self._piece_interval(k, thr, below)
            if iv is None:
                continue
            a, b = max(iv[0], lo), min(iv[1], hi + 1)
            if a >= b:
                continue
            if cur is not None and cur[1] == a:
                cur = (cur[0], b)
                continue
            if cur is not None:
                yield cur
            cur = (a, b)
        if cur is not None:
            yield cur

    def intervals(self, thr: float, below: bool, lo: int = 0, hi: Optional[int] = None) -> list[tuple[int, int]]:
        """Maximal [a, b) within [lo, hi] where log-norm < thr (below) or > thr."""
        hi = self.horizon if hi is None else min(hi, self.horizon)
        return list(self._iter_intervals(thr, below, lo, hi))

    def first_below(self, thr: float, start: int = 0) -> Optional[int]:
        """Smallest n >= start with log-norm < thr."""
        if start > self.horizon:
            return None
        return self._first(thr, True, start)

    def first_above(self, thr: float, start: int = 0) -> Optional[int]:
        """Smallest n >= start with log-norm > thr."""
        if start > self.horizon:
            return None
        return self._first(thr, False, start)

    def _first(self, thr: float, below: bool, start: int) -> Optional[int]:
        if self._dense():
            vals = self.values[start:]
            with np.errstate(invalid="ignore"):
                mask = vals < thr if below else vals > thr
            k = int(np.argmax(mask))
            return start + k if mask[k] else None
        for a, _ in self._iter_intervals(thr, below, start, self.horizon):
            return a
        return None

    def extreme(self, a: int, b: int, largest: bool) -> tuple[int, float]:
        """(argmax, max) or (argmin, min) of the log-norm over [a, b)."""
        best_n, best = -1, (NEG_INF if largest else math.inf)
        k0 = max(int(np.searchsorted(self.starts, a, side="right")) - 1, 0)
        for k in range(k0, self.n_pieces):
            pa, pb = self.piece_bounds(k)
            if pa >= b:
                break
            lo, hi = max(pa, a), min(pb, b) - 1
            if lo > hi:
                continue
            for n in (lo, hi):
                val = self._eval(k, n)
                if (largest and val > best) or (not largest and val < best):
                    best_n, best = n, val
        return best_n, best

    # -- export --------------------------------------------------------------
    def pieces(self) -> Iterator[tuple[int, int, float, float]]:
        for k in range(self.n_pieces):
            a, b = self.piece_bounds(k)
            yield a, b, float(self.values[k]), float(self.slopes[k])

    def to_json(self) -> dict[str, Any]:
        return {
            "horizon": str(self.horizon),
            "pieces": [[str(a), str(b), to_decimal(v), to_decimal(g)] for a, b, v, g in self.pieces()],
        }

    def csv_rows(self) -> Iterator[tuple[int, str]]:
        """(n, lognorm) at every n for small horizons, else at piece ends."""
        if self.horizon + 1 <= 1_000_000:
            for n, x in enumerate(self.lognorms):
                yield n, to_decimal(float(x))
        else:
            for a, b, _, _ in self.pieces():
                yield a, to_decimal(self.lognorm_at(a))
                if b - 1 > a:
                    yield b - 1, to_decimal(self.lognorm_at(b - 1))


def _record(T, x, N, starts, values, slopes, work) -> OrbitRecord:
    return OrbitRecord(
        T,
        x,
        N,
        np.asarray(starts, dtype=np.int64),
        np.asarray(values, dtype=float),
        np.asarray(slopes, dtype=float),
        work,
    )


# ---------------------------------------------------------------------------
# shifts
# ---------------------------------------------------------------------------


def shift_lognorm_at(T: OperatorSpec, x: SparseVector, n: int) -> float:
    """Closed-form log||T^n x|| for shift kinds, any n (Python ints welcome)."""
    if not T.is_shift:
        raise UnsupportedKind(f"closed-form orbit only for shifts, not {T.kind}")
    e, v, d = T.space.v_exponent, T.space.v, T.direction
    ells = [
        c.logmag + T.coef_log(a, n) + e * v.log_at(a + d * n) for a, c in x if T.alive(a, n)
    ]
    return T.space.combine(ells)


def _runlen(r: Optional[int]) -> float:
    return math.inf if r is None else r


def _shift_orbit(T: OperatorSpec, x: SparseVector, N: int, budget: int) -> OrbitRecord:
    e, v, d = T.space.v_exponent, T.space.v, T.direction
    entries = [(a, c.logmag) for a, c in x]
    starts: list[int] = []
    values: list[float] = []
    slopes: list[float] = []
    work = 0
    n = 0
    while n <= N:
        alive = [(a, lc) for a, lc in entries if T.alive(a, n)]
        if not alive:
            starts.append(n)
            values.append(NEG_INF)
            slopes.append(0.0)
            break
        ells = np.array([lc + T.coef_log(a, n) + e * v.log_at(a + d * n) for a, lc in alive])
        gs = np.empty(len(alive))
        run = math.inf
        for idx, (a, _) in enumerate(alive):
            pos = a + d * n
            if d < 0:
                if pos == 0:
                    gs[idx] = NEG_INF
                    run = 0
                    continue
                gs[idx] = T.step_log(pos) + e * (v.log_at(pos - 1) - v.log_at(pos))
                rw = math.inf if T.kind == "BackwardShift" else _runlen(T.w.const_run_back(pos))  # type: ignore[union-attr]
                rv = v.delta_run_back(pos - 1)
                run = min(run, pos, rw, rv)
            else:
                gs[idx] = T.step_log(pos) + e * (v.log_at(pos + 1) - v.log_at(pos))
                rw = _runlen(T.w.const_run(pos))  # type: ignore[union-attr]
                rv = _runlen(v.delta_run(pos))
                run = min(run, rw, rv)
        L = int(min(1 + run, N - n + 1))
        uniform = bool(np.all(gs == gs[0])) and math.isfinite(gs[0])
        if L == 1 or uniform:
            starts.append(n)
            values.append(T.space.combine(ells.tolist()))
            slopes.append(float(gs[0]) if (uniform and L > 1) else 0.0)
            work += len(alive)
        else:
            # entries drift at different rates: evaluate each step
            work += L * len(alive)
            if work > budget:
                raise ResourceLimitError(f"orbit work {work} exceeds budget {budget}")
            t = np.arange(L)[:, None]
            mat = ells[None, :] + t * gs[None, :]
            if T.space.kind == "c0":
                vals = mat.max(axis=1)
            else:
                p = T.space.p
                m = mat.max(axis=1, keepdims=True)
                vals = (m[:, 0] * p + np.log(np.exp(p * (mat - m)).sum(axis=1))) / p
            starts.extend(range(n, n + L))
            values.extend(vals.tolist())
            slopes.extend([0.0] * L)
        if work > budget:
            raise ResourceLimitError(f"orbit work {work} exceeds budget {budget}")
        n += L
    return _record(T, x, N, starts, values, slopes, work)


# ---------------------------------------------------------------------------
# lambda I + shift: dense window iteration in log domain
# ---------------------------------------------------------------------------


def _signed_add(sa, ma, sb, mb):
    """Vectorised signed log-sum-exp with the cancellation rule."""
    hi = np.maximum(ma, mb)
    lo = np.minimum(ma, mb)
    a_big = ma >= mb
    s_hi = np.where(a_big, sa, sb)
    s_lo = np.where(a_big, sb, sa)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        dlt = np.where(np.isfinite(hi), lo - hi, NEG_INF)
        same = s_hi * s_lo >= 0
        mag_same = hi + np.log1p(np.exp(dlt))
        mag_diff = hi + np.log1p(-np.exp(dlt))
    mag = np.where(same, mag_same, mag_diff)
    zero = (~same) & ((dlt == 0.0) | (mag < hi - cancellation_threshold()))
    zero |= (s_hi == 0) & (s_lo == 0)
    sign = np.where(s_hi != 0, s_hi, s_lo)
    mag = np.where(zero, NEG_INF, mag)
    sign = np.where(zero, 0, sign)
    # a zero operand leaves the other one untouched
    only_b = sa == 0
    only_a = sb == 0
    mag = np.where(only_b, mb, np.where(only_a, ma, mag))
    sign = np.where(only_b, sb, np.where(only_a, sa, sign))
    return sign.astype(np.int8), mag


def _scalar_plus_shift_orbit(T: OperatorSpec, x: SparseVector, N: int, budget: int) -> OrbitRecord:
    S = T.inner
    assert S is not None and T.lam is not None
    lam = T.lam
    e, v, d = T.space.v_exponent, T.space.v, S.direction
    lo = x.indices[0]
    hi = x.max_index
    width = hi - lo + 1
    if width * (N + 1) + (N * (N + 1)) // 2 > budget:
        raise ResourceLimitError("lambda I + shift orbit exceeds budget")
    sg = np.zeros(width, dtype=np.int8)
    mg = np.full(width, NEG_INF)
    for i, c in x:
        sg[i - lo] = c.sign
        mg[i - lo] = c.logmag
    reach = hi + (N if d > 0 else 0) + 2
    wl = np.array([S.step_log(k) for k in range(reach)])
    vl = np.array([v.log_at(k) for k in range(reach)])
    vals = np.empty(N + 1)
    work = 0

    def lognorm(sg, mg, lo):
        nz = sg != 0
        if not nz.any():
            return NEG_INF
        ell = mg[nz] + e * vl[lo : lo + len(sg)][nz]
        return T.space.combine(ell.tolist())

    vals[0] = lognorm(sg, mg, lo)
    for n in range(1, N + 1):
        # lambda x on the current window
        la_s = (sg * lam.sign).astype(np.int8)
        la_m = mg + lam.logmag if lam.sign != 0 else np.full_like(mg, NEG_INF)
        if d < 0:
            # (Sx)_k = w_{k+1} x_{k+1}; new window [max(lo-1,0), hi]
            new_lo = max(lo - 1, 0)
            size = hi - new_lo + 1
            A_s = np.zeros(size, dtype=np.int8)
            A_m = np.full(size, NEG_INF)
            off = lo - new_lo
            A_s[off:] = la_s
            A_m[off:] = la_m
            B_s = np.zeros(size, dtype=np.int8)
            B_m = np.full(size, NEG_INF)
            # source index k+1 in [lo, hi] lands on k in [lo-1, hi-1]
            src = np.arange(lo, hi + 1)
            keep = src >= 1
            dst = src[keep] - 1 - new_lo
            B_s[dst] = sg[keep]
            B_m[dst] = mg[keep] + wl[src[keep]]
        else:
            new_lo = lo
            size = hi - lo + 2
            A_s = np.zeros(size, dtype=np.int8)
            A_m = np.full(size, NEG_INF)
            A_s[:-1] = la_s
            A_m[:-1] = la_m
            B_s = np.zeros(size, dtype=np.int8)
            B_m = np.full(size, NEG_INF)
            src = np.arange(lo, hi + 1)
            B_s[1:] = sg
            B_m[1:] = mg + wl[src]
        B_s = np.where(np.isfinite(B_m), B_s, 0).astype(np.int8)
        A_s = np.where(np.isfinite(A_m), A_s, 0).astype(np.int8)
        sg, mg = _signed_add(A_s, A_m, B_s, B_m)
        lo = new_lo
        hi = lo + len(sg) - 1
        work += len(sg)
        vals[n] = lognorm(sg, mg, lo)
    return _record(T, x, N, np.arange(N + 1), vals, np.zeros(N + 1), work)


# ---------------------------------------------------------------------------
# finite matrices: float iteration with renormalisation
# ---------------------------------------------------------------------------


def _vec_lognorm(y: np.ndarray, space, dim: int) -> float:
    vl = np.array([space.v.log_at(i) for i in range(dim)])
    nz = y != 0
    if not nz.any():
        return NEG_INF
    ell = np.log(np.abs(y[nz])) + space.v_exponent * vl[nz]
    return space.combine(ell.tolist())


def _matrix_orbit(T: OperatorSpec, x: SparseVector, N: int, budget: int) -> OrbitRecord:
    A = T.np_matrix()
    dim = A.shape[0]
    if x.max_index >= dim:
        from ..errors import PreconditionViolation

        raise PreconditionViolation("seed support outside the matrix domain")
    if dim * dim * N > budget:
        raise ResourceLimitError("matrix orbit exceeds budget")
    scale = max((c.logmag for _, c in x), default=0.0)
    y = np.zeros(dim)
    for i, c in x:
        y[i] = c.sign * math.exp(c.logmag - scale)
    vals = np.empty(N + 1)
    logscale = scale
    for n in range(N + 1):
        ln = _vec_lognorm(y, T.space, dim)
        vals[n] = logscale + ln if ln != NEG_INF else NEG_INF
        if ln == NEG_INF:
            vals[n:] = NEG_INF
            break
        # renormalise by the max entry to stay in range
        m = float(np.max(np.abs(y)))
        y = y / m
        logscale += math.log(m)
        y = A @ y
    return _record(T, x, N, np.arange(N + 1), vals, np.zeros(N + 1), dim * dim * N)


def _iterated_orbit(T: OperatorSpec, x: SparseVector, N: int, budget: int) -> OrbitRecord:
    vals = np.empty(N + 1)
    y = x
    work = 0
    for n in range(N + 1):
        vals[n] = norm(y, T.space).logmag
        work += max(len(y), 1)
        if work > budget:
            raise ResourceLimitError(f"orbit work {work} exceeds budget {budget}")
        if n < N:
            y = apply(T, y)
    return _record(T, x, N, np.arange(N + 1), vals, np.zeros(N + 1), work)


def orbit(
    T: OperatorSpec, x: SparseVector, N: int, budget: int = DEFAULT_BUDGET, method: str = "auto"
) -> OrbitRecord:
    """log||T^n x|| for n = 0..N.

    method: 'auto' (closed form for shifts, vectorised iteration otherwise)
    or 'iterate' (apply T one step at a time; the slow reference path).
    """
    if N < 0:
        raise ValueError("horizon must be >= 0")
    if x.is_zero:
        return _record(T, x, N, [0], [NEG_INF], [0.0], 0)
    if method == "iterate":
        return _iterated_orbit(T, x, N, budget)
    if method != "auto":
        raise ValueError(f"unknown orbit method {method!r}")
    if T.is_shift:
        return _shift_orbit(T, x, N, budget)
    if T.kind == "ScalarPlus" and T.inner is not None and T.inner.is_shift:
        return _scalar_plus_shift_orbit(T, x, N, budget)
    return _matrix_orbit(T, x, N, budget)
