"""Suprema of weight ratios (M_v) and weight products (M_w).

M_v = sup{v_n / v_m : n < m} decides boundedness of backward-shift orbits on
l^p(v); M_w = sup{w_n w_{n+1} ... w_m : n < m} does the same for weighted
backward shifts.  Both are decided from the tail rule: the scan covers an
explicit window and the tail analysis proves that nothing beyond it can do
better (finite verdict) or exhibits pairs with ratio/product > 3^k for
k = 1, 2, ... (infinite verdict).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from ..seqspace import (
    BlockRunLengthTail,
    ConstantTail,
    GeometricTail,
    LogReal,
    PowerLawTail,
    RunsTail,
    WeightSequence,
    to_decimal,
)

LOG3 = math.log(3.0)
N_WITNESSES = 12
DEFAULT_SEARCH_BOUND = 1_000_000


@dataclass(frozen=True)
class SupremumVerdict:
    """verdict in {'finite', 'infinite', 'unknown'}.

    finite: ``value`` is the supremum, attained at ``argbest``.
    infinite: ``witnesses`` holds (n_k, m_k, log-ratio) with log-ratio > k log 3.
    """

    name: str
    verdict: str
    value: Optional[LogReal] = None
    argbest: Optional[tuple[int, int]] = None
    witnesses: tuple[tuple[int, int, float], ...] = ()
    search_bound: int = DEFAULT_SEARCH_BOUND
    note: str = ""

    @property
    def is_infinite(self) -> bool:
        return self.verdict == "infinite"

    @property
    def is_finite(self) -> bool:
        return self.verdict == "finite"

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"name": self.name, "verdict": self.verdict, "search_bound": str(self.search_bound)}
        if self.value is not None:
            d["log_value"] = to_decimal(self.value.logmag)
            lin = float(self.value)
            if math.isfinite(lin):
                d["value"] = format(lin, ".17g")
        if self.argbest is not None:
            d["argbest"] = [str(self.argbest[0]), str(self.argbest[1])]
        if self.witnesses:
            d["witnesses"] = [
                {"k": k, "n": str(n), "m": str(m), "log_value": to_decimal(lr), "log_3k": to_decimal(k * LOG3)}
                for k, (n, m, lr) in enumerate(self.witnesses, start=1)
            ]
        if self.note:
            d["note"] = self.note
        return d


def _gallop_first(pred, lo: int, limit: int) -> Optional[int]:
    """Smallest i >= lo with pred(i), given pred monotone (False...True); None past limit."""
    if pred(lo):
        return lo
    step = 1
    prev = lo
    while True:
        hi = prev + step
        if hi > limit:
            hi = limit
            if not pred(hi):
                return None
        if pred(hi):
            break
        prev = hi
        step *= 2
    lo_, hi_ = prev, hi  # pred(lo_) False, pred(hi_) True
    while hi_ - lo_ > 1:
        mid = (lo_ + hi_) // 2
        if pred(mid):
            hi_ = mid
        else:
            lo_ = mid
    return hi_


# ---------------------------------------------------------------------------
# M_v
# ---------------------------------------------------------------------------


def _max_ratio_pairs(logs: list[float], offset: int = 0) -> tuple[float, tuple[int, int]]:
    """max_{n<m} logs[n] - logs[m] with the maximising pair."""
    best, arg = -math.inf, (offset, offset + 1)
    run_max, run_arg = logs[0], 0
    for m in range(1, len(logs)):
        cand = run_max - logs[m]
        if cand > best:
            best, arg = cand, (offset + run_arg, offset + m)
        if logs[m] > run_max:
            run_max, run_arg = logs[m], m
    return best, arg


def compute_Mv(v: WeightSequence, search_bound: int = DEFAULT_SEARCH_BOUND) -> SupremumVerdict:
    """M_v = sup{v_n / v_m : n in N, m > n}."""
    P, tail = v.P, v.tail
    trend = tail.trend()
    if trend == "dec":
        return _Mv_infinite(v, search_bound)
    if isinstance(tail, RunsTail):
        elems = _run_elements(v, 0)
        best, arg = 0.0, (P + tail.total, P + tail.total + 1)
        run_max, run_arg = elems[0][1], elems[0][0]
        for idx, lv, _ in elems[1:]:
            if run_max - lv > best:
                best, arg = run_max - lv, (run_arg, idx)
            if lv > run_max:
                run_max, run_arg = lv, idx
        return SupremumVerdict("M_v", "finite", LogReal.from_log(best), arg, search_bound=search_bound)
    if trend in ("const", "inc"):
        # the tail never drops below its first value, so every optimal pair
        # has m <= P + 1
        logs = v.logs(0, P + 2)
        best, arg = _max_ratio_pairs(logs)
        return SupremumVerdict("M_v", "finite", LogReal.from_log(best), arg, search_bound=search_bound)
    assert isinstance(tail, BlockRunLengthTail)
    live = [lv for lv, b, s in zip(tail.log_values, tail.base, tail.slope) if b > 0 or s > 0]
    # every ordered pair of live tail values occurs (in both orders) across periods
    cands = [max(live) - min(live)]
    arg = None
    if P:
        pm = max(v.prefix)
        cands.append(pm - min(live))
        if P >= 2:
            b, arg = _max_ratio_pairs(list(v.prefix))
            cands.append(b)
    best = max(cands)
    # locate a concrete maximising pair by scanning the first two periods
    window = v.logs(0, P + tail.period_start(2))
    best_scan, arg_scan = _max_ratio_pairs(window)
    if best_scan >= best:
        arg = arg_scan
    return SupremumVerdict("M_v", "finite", LogReal.from_log(best), arg, search_bound=search_bound)


def _Mv_infinite(v: WeightSequence, search_bound: int) -> SupremumVerdict:
    P = v.P
    head = v.logs(0, P + 1)
    n = int(np.argmax(head))
    top = head[n]
    wits = []
    for k in range(1, N_WITNESSES + 1):
        thr = top - k * LOG3
        m = _gallop_first(lambda i: v.log_at(i) < thr, n + 1, max(search_bound, n + 2))
        if m is None:
            break
        # v is eventually decreasing, so the first hit can sit in the prefix
        wits.append((n, m, top - v.log_at(m)))
    note = "" if len(wits) == N_WITNESSES else f"witnesses beyond search bound after k={len(wits)}"
    return SupremumVerdict("M_v", "infinite", None, None, tuple(wits), search_bound, note)


# ---------------------------------------------------------------------------
# M_w
# ---------------------------------------------------------------------------


def max_product_scan(logs: np.ndarray, offset: int = 0) -> tuple[float, tuple[int, int]]:
    """Maximum of sum(logs[n..m]) over n < m (at least two factors).

    Prefix-sum form of the maximum-subarray scan: best over j of
    C[j] - min_{i <= j-2} C[i].
    """
    if len(logs) < 2:
        raise ValueError("need at least two factors")
    C = np.concatenate(([0.0], np.cumsum(np.asarray(logs, dtype=float))))
    runmin = np.minimum.accumulate(C[:-2])
    arg_runmin = np.zeros(len(runmin), dtype=np.int64)
    # index of the running minimum
    cur = 0
    for i in range(1, len(runmin)):
        if C[i] < C[cur]:
            cur = i
        arg_runmin[i] = cur
    gains = C[2:] - runmin
    j = int(np.argmax(gains))
    n = int(arg_runmin[j])
    m = j + 1  # product covers logs[n .. j+1]
    return float(math.fsum(logs[n : m + 1])), (offset + n, offset + m)


def compute_Mw(w: WeightSequence, search_bound: int = DEFAULT_SEARCH_BOUND, start: int = 1) -> SupremumVerdict:
    """M_w = sup{prod_{k=n}^m |w_k| : start <= n < m}.

    ``start`` = 1 matches weighted backward shifts, which never use w_0.
    """
    P, tail = w.P, w.tail
    trend = tail.trend()
    base = max(P, start)
    if isinstance(tail, ConstantTail) or trend == "const":
        if tail.log_at(0) > 0:
            return _Mw_infinite_from(w, start, search_bound)
        end = base + 2
    elif isinstance(tail, (GeometricTail, PowerLawTail)):
        if trend == "inc":
            first_pos = _gallop_first(lambda i: w.log_at(i) > 0, base, 10**30)
            assert first_pos is not None
            return _Mw_infinite_from(w, first_pos, search_bound)
        i0 = _gallop_first(lambda i: w.log_at(i) < 0, base, 10**30)
        assert i0 is not None
        end = i0 + 2
    elif isinstance(tail, RunsTail):
        if tail.log_final > 0:
            return _Mw_infinite_from(w, max(P + tail.total, start), search_bound)
        return _Mw_runs(w, start, search_bound)
    else:
        assert isinstance(tail, BlockRunLengthTail)
        res = _block_analysis(w, tail, start, search_bound)
        if isinstance(res, SupremumVerdict):
            return res
        end = res
    if end - start > search_bound:
        return SupremumVerdict("M_w", "unknown", search_bound=search_bound, note=f"analysis window {end - start} exceeds bound")
    logs = np.array(w.logs(start, end))
    best, arg = max_product_scan(logs, start)
    return SupremumVerdict("M_w", "finite", LogReal.from_log(best), arg, search_bound=search_bound)


def _Mw_infinite_from(w: WeightSequence, n: int, search_bound: int) -> SupremumVerdict:
    """Products starting at n grow without bound (n sits where the tail is > 1)."""
    wits = []
    for k in range(1, N_WITNESSES + 1):
        t = w.first_cumlog_above(n, k * LOG3, n + 2)
        if t is None or t - 1 - n > search_bound:
            break
        wits.append((n, t - 1, w.log_range(n, t)))
    return SupremumVerdict("M_w", "infinite", None, None, tuple(wits), search_bound)


def _block_analysis(w: WeightSequence, tail: BlockRunLengthTail, start: int, search_bound: int):
    P = w.P
    lv, bs, sl = tail.log_values, tail.base, tail.slope
    growing = [s for s in range(len(lv)) if lv[s] > 0 and sl[s] > 0]
    if growing:
        s = growing[0]
        wits = []
        for k in range(1, N_WITNESSES + 1):
            K = _gallop_first(
                lambda K: tail.seg_len(K, s) >= 2 and tail.seg_len(K, s) * lv[s] > k * LOG3, 0, 10**30
            )
            assert K is not None
            n = P + tail.period_start(K) + sum(tail.seg_len(K, r) for r in range(s))
            n = max(n, start)
            m = P + tail.period_start(K) + sum(tail.seg_len(K, r) for r in range(s + 1)) - 1
            if m - start > search_bound:
                break
            wits.append((n, m, w.log_range(n, m + 1)))
        return SupremumVerdict("M_w", "infinite", None, None, tuple(wits), search_bound, "unbounded block of weights > 1")
    # period K contributes B0 + K*S1 in log
    B0 = math.fsum(b * v for b, v in zip(bs, lv))
    S1 = math.fsum(s * v for s, v in zip(sl, lv))
    if S1 == 0 and B0 > 0:
        K_start = 0
        n = max(P + tail.period_start(K_start), start)
        return _Mw_infinite_from(w, n, search_bound)
    K0 = 0 if B0 <= 0 else math.ceil(-B0 / S1) if S1 < 0 else 0
    while B0 + K0 * S1 > 0:
        K0 += 1
    # beyond period K0 every period sums to <= 0 and every partial sum is
    # dominated by the same position one period earlier, so a scan through
    # period K0 + 2 sees the supremum
    return P + tail.period_start(K0 + 3)


def _run_elements(w: WeightSequence, start: int) -> list[tuple[int, float, int]]:
    """(first index, log value, length) for prefix entries, runs, and two
    entries of the final value, from ``start`` on."""
    tail = w.tail
    assert isinstance(tail, RunsTail)
    P = w.P
    out = [(i, w.prefix[i], 1) for i in range(start, P)]
    pos = P
    for lv, n in zip(tail.log_values, tail.lengths):
        lo = max(pos, start)
        if pos + n > lo:
            out.append((lo, lv, pos + n - lo))
        pos += n
    pos = max(pos, start)
    out += [(pos, tail.log_final, 1), (pos + 1, tail.log_final, 1)]
    return out


def _Mw_runs(w: WeightSequence, start: int, search_bound: int) -> SupremumVerdict:
    """Maximum product over a run-compressed sequence.

    An optimal window is either exactly two factors long or starts and ends
    on non-negative runs, which it then covers fully; so whole-run windows
    plus all two-factor windows suffice.
    """
    el = _run_elements(w, start)
    best, arg = -math.inf, (start, start + 1)
    for a in range(len(el)):
        total, length = 0.0, 0
        for b in range(a, len(el)):
            total += el[b][1] * el[b][2]
            length += el[b][2]
            if length >= 2 and total > best:
                best, arg = total, (el[a][0], el[b][0] + el[b][2] - 1)
        i, lv, n = el[a]
        if n >= 2 and 2 * lv > best:
            best, arg = 2 * lv, (i, i + 1)
        if a + 1 < len(el) and lv + el[a + 1][1] > best:
            best, arg = lv + el[a + 1][1], (i + n - 1, el[a + 1][0])
    return SupremumVerdict("M_w", "finite", LogReal.from_log(best), arg, search_bound=search_bound)
