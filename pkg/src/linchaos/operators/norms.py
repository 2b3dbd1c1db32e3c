"""Power norms ||T^n|| and spectral radius estimates.

Shifts map basis vectors to multiples of basis vectors without collisions,
so on l^p(v) and c_0(v)

    log ||T^n|| = sup_k G_n(k),  G_n(k) = log ||T^n e_k|| - log ||e_k||,

where G_n(k) is a window sum of the per-step factors g(pos).  The sup over
k is split into an explicit region (windows touching a prefix) and the tail
region, where the rule for g decides the answer in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import UnsupportedKind
from ..seqspace import (
    NEG_INF,
    ZERO,
    BlockRunLengthTail,
    ConstantTail,
    GeometricTail,
    LogReal,
    PowerLawTail,
    RunsTail,
)
from .spec import OperatorSpec, shift_log_norm_bound


@dataclass(frozen=True)
class PowerNorm:
    lower: LogReal
    upper: LogReal
    exact: bool

    @property
    def width(self) -> float:
        """Bracket width in log units (0 when exact)."""
        if self.upper.is_zero:
            return 0.0
        if self.lower.is_zero:
            return math.inf
        return self.upper.logmag - self.lower.logmag


@dataclass(frozen=True)
class SpectralInterval:
    lower: LogReal
    upper: LogReal
    exact: bool
    method: str

    @property
    def degenerate(self) -> bool:
        return self.exact


class ScalarPlusNormUnsupported(UnsupportedKind):
    def __init__(self, bound: LogReal) -> None:
        super().__init__("power_norm is not exact for ScalarPlus; only the bound (|lambda|+||T||)^n is available")
        self.bound = bound


# ---------------------------------------------------------------------------
# shift analysis
# ---------------------------------------------------------------------------


def _G(T: OperatorSpec, n: int, k: int) -> float:
    e, v, d = T.space.v_exponent, T.space.v, T.direction
    return T.coef_log(k, n) + e * (v.log_at(k + d * n) - v.log_at(k))


def _v_part_tail(T: OperatorSpec) -> tuple[str, float]:
    """Tail behaviour of e*(log v_{pos+d} - log v_pos): (trend, limit)."""
    e, d = T.space.v_exponent, T.direction
    t = T.space.v.tail
    if isinstance(t, ConstantTail):
        return "const", 0.0
    if isinstance(t, GeometricTail):
        return "const", d * e * t.log_ratio
    if isinstance(t, PowerLawTail):
        if t.exponent == 0.0:
            return "const", 0.0
        # backward: e*beta*log((p-1+o)/(p+o)) rises to 0 when beta > 0
        rising = (t.exponent > 0) == (d < 0)
        return ("inc" if rising else "dec"), 0.0
    if isinstance(t, RunsTail):
        return "runs", 0.0
    return "block", math.nan


def _w_part_tail(T: OperatorSpec) -> tuple[str, float]:
    if T.kind == "BackwardShift":
        return "const", 0.0
    t = T.w.tail  # type: ignore[union-attr]
    if isinstance(t, ConstantTail):
        return "const", t.log_c
    if isinstance(t, GeometricTail):
        if t.log_ratio == 0.0:
            return "const", t.log_scale
        return ("inc", math.inf) if t.log_ratio > 0 else ("dec", NEG_INF)
    if isinstance(t, PowerLawTail):
        if t.exponent == 0.0:
            return "const", t.log_scale
        return ("inc", math.inf) if t.exponent > 0 else ("dec", NEG_INF)
    if isinstance(t, RunsTail):
        return "runs", t.log_final
    return "block", math.nan


def _explicit_region(T: OperatorSpec, n: int) -> range:
    Q = T.space.v.P + (T.w.P if T.w is not None else 0) + 2
    if T.direction < 0:
        return range(n, n + Q + 1)
    return range(0, Q + 1)


def _combine_trend(a: str, b: str) -> str:
    if a == "const":
        return b
    if b == "const" or a == b:
        return a
    return "mixed"


def shift_power_norm(T: OperatorSpec, n: int) -> PowerNorm:
    if n == 0:
        return PowerNorm(LogReal(1, 0.0), LogReal(1, 0.0), True)
    best = max(_G(T, n, k) for k in _explicit_region(T, n))
    wt, wl = _w_part_tail(T)
    vt, vl = _v_part_tail(T)
    if "runs" in (wt, vt):
        # finitely many runs: scan the windows that can touch them
        lower = max(best, _scan_windows(T, n))
        return _bracket(lower, max(lower, n * shift_log_norm_bound(T)))
    if wt != "block" and vt != "block":
        trend = _combine_trend(wt, vt)
        if trend in ("const", "dec"):
            return _exact(best)
        if trend == "inc":
            return _exact(max(best, n * (wl + vl)))
        return _bracket(best, n * shift_log_norm_bound(T))
    if wt == "block" and vt in ("const",) :
        t: BlockRunLengthTail = T.w.tail  # type: ignore[union-attr,assignment]
        top = max(t.log_values)
        growing = any(t.log_values[s] == top and t.slope[s] > 0 for s in range(len(t.log_values)))
        if growing or any(t.log_values[s] == top and t.base[s] >= n for s in range(len(t.log_values))):
            return _exact(max(best, n * (top + vl)))
        lower = max(best, _scan_windows(T, n))
        return _bracket(lower, n * (top + vl))
    if vt == "block" and wt == "const":
        t = T.space.v.tail  # type: ignore[assignment]
        lower = max(best, _scan_windows(T, n))
        e, d = T.space.v_exponent, T.direction
        S = len(t.log_values)
        cands = [0.0]
        for s in range(S):
            a, b = t.log_values[s], t.log_values[(s + 1) % S]
            cands.append(e * (b - a) if d > 0 else e * (a - b))
        upper = n * wl + e * (max(t.log_values) - min(t.log_values))
        if all(sl > 0 for sl in t.slope):
            # long segments: a window crosses at most one boundary, and the
            # crossing pattern recurs every period
            return _exact(max(lower, n * wl + max(cands))) if _scan_covers(T, n) else _bracket(lower, upper)
        return _bracket(lower, upper)
    return _bracket(best, n * shift_log_norm_bound(T))


def _scan_covers(T: OperatorSpec, n: int) -> bool:
    t = T.space.v.tail
    assert isinstance(t, BlockRunLengthTail)
    K = max(math.ceil((n - b) / s) if s > 0 else 0 for b, s in zip(t.base, t.slope))
    return t.period_start(K + 2) <= 2_000_000


def _scan_windows(T: OperatorSpec, n: int, cap: int = 2_000_000) -> float:
    """max of G_n(k) over k in the first ``cap`` admissible positions."""
    k0 = n if T.direction < 0 else 0
    hi = k0 + cap
    e, v = T.space.v_exponent, T.space.v
    lo_idx = 0
    hi_idx = hi + n + 2
    if hi_idx > 5 * cap:
        return NEG_INF
    vlog = np.array([v.log_at(i) for i in range(lo_idx, hi_idx)])
    if T.kind == "BackwardShift":
        wlog = np.zeros(hi_idx)
    else:
        wlog = np.array([T.w.log_at(i) for i in range(hi_idx)])  # type: ignore[union-attr]
    cw = np.concatenate([[0.0], np.cumsum(wlog)])
    ks = np.arange(k0, hi)
    if T.direction < 0:
        G = cw[ks + 1] - cw[ks - n + 1] + e * (vlog[ks - n] - vlog[ks])
    else:
        G = cw[ks + n] - cw[ks] + e * (vlog[ks + n] - vlog[ks])
    return float(G.max())


def _exact(x: float) -> PowerNorm:
    r = LogReal.from_log(x)
    return PowerNorm(r, r, True)


def _bracket(lo: float, hi: float) -> PowerNorm:
    return PowerNorm(LogReal.from_log(lo), LogReal.from_log(max(lo, hi)), False)


# ---------------------------------------------------------------------------
# finite matrices
# ---------------------------------------------------------------------------


def _weighted_matrix(T: OperatorSpec) -> np.ndarray:
    A = T.np_matrix()
    d = A.shape[0]
    e = T.space.v_exponent
    dv = np.array([math.exp(e * T.space.v.log_at(i)) for i in range(d)])
    return (dv[:, None] * A) / dv[None, :]


def _scaled_power(A: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """A^n as (M, s) with A^n = exp(s) M, by repeated squaring with rescaling."""
    d = A.shape[0]
    result = np.eye(d)
    rs = 0.0
    base = A.copy()
    bs = 0.0
    k = n
    while k > 0:
        if k & 1:
            result = result @ base
            rs += bs
            m = np.max(np.abs(result))
            if m == 0:
                return result, 0.0
            result /= m
            rs += math.log(m)
        k >>= 1
        if k:
            base = base @ base
            bs *= 2
            m = np.max(np.abs(base))
            if m == 0:
                return np.zeros_like(A), 0.0
            base /= m
            bs += math.log(m)
    return result, rs


def matrix_power_norm(T: OperatorSpec, n: int, iterations: int = 64) -> PowerNorm:
    A = _weighted_matrix(T)
    M, s = _scaled_power(A, n)
    if not np.any(M):
        return PowerNorm(ZERO, ZERO, True)
    kind, p = T.space.kind, T.space.p
    if kind == "c0":
        return _exact(s + math.log(np.max(np.abs(M).sum(axis=1))))
    if p == 1.0:
        return _exact(s + math.log(np.max(np.abs(M).sum(axis=0))))
    if p == 2.0:
        return _exact(s + math.log(np.linalg.norm(M, 2)))
    # general p: power-iteration lower bound from each coordinate vector,
    # Riesz-Thorin upper bound
    q = p / (p - 1.0)
    best = 0.0
    for j in range(M.shape[0]):
        x = np.zeros(M.shape[0])
        x[j] = 1.0
        for _ in range(iterations):
            y = M @ x
            ny = np.linalg.norm(y, p)
            if ny == 0:
                break
            best = max(best, ny / np.linalg.norm(x, p))
            z = np.sign(y) * np.abs(y / ny) ** (p - 1)
            x = M.T @ z
            nx = np.linalg.norm(x, q)
            if nx == 0:
                break
            x = np.sign(x) * np.abs(x / nx) ** (q - 1)
    up = np.max(np.abs(M).sum(axis=0)) ** (1 / p) * np.max(np.abs(M).sum(axis=1)) ** (1 - 1 / p)
    lo = LogReal.from_log(s + math.log(best)) if best > 0 else ZERO
    return PowerNorm(lo, LogReal.from_log(s + math.log(up)), False)


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def power_norm_bracket(T: OperatorSpec, n: int) -> PowerNorm:
    if n < 0:
        raise ValueError("negative power")
    if T.is_shift:
        return shift_power_norm(T, n)
    if T.kind == "FiniteMatrix" or (T.kind == "ScalarPlus" and T.inner is not None and T.inner.kind == "FiniteMatrix"):
        if n == 0:
            return _exact(0.0)
        return matrix_power_norm(T, n)
    assert T.kind == "ScalarPlus" and T.lam is not None and T.inner is not None
    inner = power_norm_bracket(T.inner, 1)
    one = abs(T.lam) + inner.upper
    return PowerNorm(ZERO if n else LogReal(1, 0.0), one ** n if n else LogReal(1, 0.0), n == 0)


def power_norm(T: OperatorSpec, n: int) -> LogReal:
    """||T^n|| (exact for shifts with closed-form tails and small matrices).

    Raises ScalarPlusNormUnsupported for lambda I + shift, carrying the bound.
    Where only a bracket is available the upper end is returned; use
    power_norm_bracket to see the width.
    """
    if T.kind == "ScalarPlus" and T.inner is not None and T.inner.is_shift:
        raise ScalarPlusNormUnsupported(power_norm_bracket(T, n).upper)
    return power_norm_bracket(T, n).upper


def _shift_radius_closed_form(T: OperatorSpec) -> Optional[float]:
    """log r(T) for shifts when the tail rule fixes it; None otherwise."""
    wt, wl = _w_part_tail(T)
    vt, vl = _v_part_tail(T)
    if "runs" in (wt, vt):
        # runs are a bounded perturbation of the eventual constant
        if wt == "runs" and vt in ("const", "runs"):
            return wl + (vl if vt == "const" else 0.0)
        if vt == "runs" and wt == "const":
            return wl
        return None
    if wt != "block" and vt != "block":
        if _combine_trend(wt, vt) == "mixed":
            return None
        # window averages of g converge to the tail limit of g
        return wl + vl
    if wt == "block" and vt == "const":
        t = T.w.tail  # type: ignore[union-attr]
        top = max(t.log_values)
        if any(t.log_values[s] == top and t.slope[s] > 0 for s in range(len(t.log_values))):
            return top + vl
        return None
    if vt == "block" and wt == "const":
        return wl  # the v part of G_n is bounded
    return None


def spectral_radius_estimate(T: OperatorSpec, n_max: int = 64) -> SpectralInterval:
    if T.kind == "FiniteMatrix" or (T.kind == "ScalarPlus" and T.inner is not None and T.inner.kind == "FiniteMatrix"):
        r = float(np.max(np.abs(np.linalg.eigvals(T.np_matrix()))))
        val = LogReal.of(r)
        return SpectralInterval(val, val, True, "eigenvalues")
    if T.kind == "ScalarPlus":
        assert T.inner is not None and T.lam is not None
        inner = spectral_radius_estimate(T.inner, n_max)
        # shift spectra are discs centred at 0, so sigma(lambda + S) is the
        # disc of radius r(S) around lambda
        lam = abs(T.lam)
        return SpectralInterval(lam + inner.lower, lam + inner.upper, inner.exact, "disc-translate:" + inner.method)
    lr = _shift_radius_closed_form(T)
    if lr is not None:
        val = LogReal.from_log(lr)
        return SpectralInterval(val, val, True, "tail-rule")
    upper = math.inf
    for n in range(1, n_max + 1):
        pn = shift_power_norm(T, n)
        upper = min(upper, pn.upper.logmag / n)
    return SpectralInterval(ZERO, LogReal.from_log(upper), False, "gelfand-upper")
