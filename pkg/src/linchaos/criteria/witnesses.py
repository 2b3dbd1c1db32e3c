"""Witness checks for the chaos criteria: SDCC, DCC and LYCC."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from ..errors import PreconditionViolation
from ..operators import DEFAULT_BUDGET, OperatorSpec, OrbitRecord, orbit, shift_lognorm_at
from ..seqspace import LOG2, NEG_INF, SparseVector, linear_combination, to_decimal

DECAY_TOL = 1e-6
LOG_DECAY_TOL = math.log(DECAY_TOL)
# slack for ">=" comparisons of log-norms that are equal in exact arithmetic
GE_SLACK = 1e-12


# ---------------------------------------------------------------------------
# decay (condition (a) of every criterion)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayEvidence:
    decays: bool
    mode: str  # 'exact-zero' | 'tolerance' | 'none'
    index: Optional[int]  # first n with T^n x = 0, or the probe horizon

    def to_json(self) -> dict[str, Any]:
        return {"decays": self.decays, "mode": self.mode, "index": None if self.index is None else str(self.index)}


def decay_evidence(T: OperatorSpec, x: SparseVector, probe_horizon: int, budget: int = DEFAULT_BUDGET) -> DecayEvidence:
    """Does the orbit of x tend to 0?

    Backward shifts annihilate a finitely supported x after max_index + 1
    steps; that exact zero is checked in closed form.  Otherwise the orbit
    must sit below 1e-6 ||x|| at the probe horizon.
    """
    if x.is_zero:
        return DecayEvidence(True, "exact-zero", 0)
    if T.is_shift and T.direction < 0:
        n = x.max_index + 1
        assert shift_lognorm_at(T, x, n) == NEG_INF
        return DecayEvidence(True, "exact-zero", n)
    rec = orbit(T, x, probe_horizon, budget)
    last = rec.lognorm_at(probe_horizon)
    if last == NEG_INF:
        return DecayEvidence(True, "exact-zero", rec.first_below(-1e308, 0))
    ok = last < rec.lognorm_at(0) + LOG_DECAY_TOL
    return DecayEvidence(ok, "tolerance" if ok else "none", probe_horizon)


# ---------------------------------------------------------------------------
# SDCC
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SDCCWitness:
    """x_m for m = 1..m_max with ||T^i x_m|| >= r^i ||x_m|| (i <= m) and T^k x_m -> 0."""

    r: float
    xs: tuple[SparseVector, ...]
    verified_range: int
    decay: tuple[DecayEvidence, ...]
    accepted = True

    def to_json(self) -> dict[str, Any]:
        return {
            "criterion": "SDCC",
            "r": format(self.r, ".17g"),
            "verified_range": self.verified_range,
            "xs": [x.to_json() for x in self.xs],
            "decay": [d.to_json() for d in self.decay],
        }


@dataclass(frozen=True)
class CriterionRejection:
    criterion: str
    reason: str
    m: Optional[int] = None
    details: dict[str, Any] = field(default_factory=dict)
    accepted = False

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"criterion": self.criterion, "verdict": "rejected", "reason": self.reason}
        if self.m is not None:
            d["m"] = self.m
        if self.details:
            d["details"] = self.details
        return d


def default_pool(T: OperatorSpec, size: int = 64) -> list[SparseVector]:
    """Basis vectors e_0..e_{size-1}; for matrices, every {-1,0,1} grid vector."""
    if T.kind == "FiniteMatrix" or (T.kind == "ScalarPlus" and T.inner is not None and T.inner.kind == "FiniteMatrix"):
        d = T.dim
        if d > 8:
            return [SparseVector.basis(i) for i in range(d)]
        out = []
        for coefs in itertools.product((-1, 0, 1), repeat=d):
            if any(coefs) and next(c for c in coefs if c) > 0:
                out.append(SparseVector.from_dict({i: c for i, c in enumerate(coefs) if c}))
        return out
    return [SparseVector.basis(i) for i in range(size)]


def _grows(rec: OrbitRecord, r_log: float, m: int) -> bool:
    base = rec.lognorm_at(0)
    return all(rec.lognorm_at(i) >= base + i * r_log - GE_SLACK for i in range(1, m + 1))


def sdcc_witness_search(
    T: OperatorSpec,
    r: float,
    m_max: int,
    pool: Optional[Sequence[SparseVector]] = None,
    probe_horizon: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> SDCCWitness | CriterionRejection:
    """For each m <= m_max pick the first pool vector meeting both SDCC conditions."""
    if not r > 1:
        raise PreconditionViolation("r must be > 1", r=r)
    pool = default_pool(T) if pool is None else list(pool)
    pool = [x for x in pool if not x.is_zero]
    if not pool:
        return CriterionRejection("SDCC", "pool-exhausted", 1)
    r_log = math.log(r)
    xs, decs = [], []
    cache: dict[int, tuple[OrbitRecord, DecayEvidence]] = {}
    for m in range(1, m_max + 1):
        hit = None
        for idx, x in enumerate(pool):
            horizon = probe_horizon or max(4 * m_max, x.max_index + 2, 16)
            if idx not in cache:
                rec = orbit(T, x, max(m_max, 1), budget)
                cache[idx] = (rec, decay_evidence(T, x, horizon, budget))
            rec, dec = cache[idx]
            if dec.decays and _grows(rec, r_log, m):
                hit = (x, dec)
                break
        if hit is None:
            return CriterionRejection("SDCC", "pool-exhausted", m, {"pool_size": len(pool)})
        xs.append(hit[0])
        decs.append(hit[1])
    return SDCCWitness(float(r), tuple(xs), m_max, tuple(decs))


# ---------------------------------------------------------------------------
# DCC
# ---------------------------------------------------------------------------

Combination = Union[SparseVector, Mapping[int, float], Sequence[tuple[float, int]]]


def _resolve_span(y: Combination, xs: Sequence[SparseVector]) -> SparseVector:
    """y as a vector, checking that it lies in span(xs)."""
    if isinstance(y, Mapping):
        terms = [(c, xs[j]) for j, c in y.items()]
        return linear_combination(terms)
    if not isinstance(y, SparseVector):
        return linear_combination([(c, xs[j]) for c, j in y])
    # explicit vector: least squares on the union support, then exact residual
    supp = sorted(set(y.support).union(*(x.support for x in xs)))
    if not set(y.support) <= set().union(*(x.support for x in xs)):
        raise PreconditionViolation("y is not in the span of xs (support outside)", support=y.max_index)
    pos = {i: k for k, i in enumerate(supp)}
    scale = max(c.logmag for _, c in y) if not y.is_zero else 0.0
    A = np.zeros((len(supp), len(xs)))
    for j, x in enumerate(xs):
        sx = max(c.logmag for _, c in x)
        for i, c in x:
            A[pos[i], j] = c.sign * math.exp(c.logmag - sx)
    b = np.zeros(len(supp))
    for i, c in y:
        b[pos[i]] = c.sign * math.exp(c.logmag - scale)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.linalg.norm(A @ coef - b) > 1e-9 * max(np.linalg.norm(b), 1.0):
        raise PreconditionViolation("y is not in the span of xs")
    return y


@dataclass(frozen=True)
class DCCReport:
    ok: bool
    decay: tuple[DecayEvidence, ...]
    ratios: tuple[tuple[int, int, int], ...]  # (m, count, N_m)
    failures: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict[str, Any]:
        return {
            "criterion": "DCC",
            "ok": self.ok,
            "decay": [d.to_json() for d in self.decay],
            "ratios": [
                {"m": m, "count": str(c), "N": str(N), "ratio": format(c / N, ".17g"), "required": format(1 - 1 / m, ".17g")}
                for m, c, N in self.ratios
            ],
            "failures": list(self.failures),
        }


def count_at_least(rec: OrbitRecord, thr_log: float, n: int) -> int:
    """card{0 <= i < n : log||T^i x|| >= thr_log} (with a 1e-12 slack)."""
    below = rec.intervals(thr_log - GE_SLACK, True, 0, n - 1)
    return n - sum(b - a for a, b in below)


def dcc_witness_check(
    T: OperatorSpec,
    xs: Sequence[SparseVector],
    ys: Sequence[Combination],
    Ns: Sequence[int],
    probe_horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> DCCReport:
    """Condition (a): every x_m has a decaying orbit.  Condition (b): for
    m = 1, 2, ..., (1/N_m) card{0 <= i < N_m : ||T^i y_m|| >= m ||y_m||} >= 1 - 1/m."""
    if len(ys) != len(Ns):
        raise PreconditionViolation("need one N_m per y_m", ys=len(ys), Ns=len(Ns))
    if any(b <= a for a, b in zip(Ns, Ns[1:])) or (Ns and Ns[0] < 1):
        raise PreconditionViolation("Ns must be positive and increasing")
    yv = [_resolve_span(y, xs) for y in ys]
    failures = []
    decs = tuple(decay_evidence(T, x, probe_horizon, budget) for x in xs)
    for j, d in enumerate(decs, start=1):
        if not d.decays:
            failures.append(f"(a) x_{j} does not decay within {probe_horizon}")
    ratios = []
    for m, (y, N) in enumerate(zip(yv, Ns), start=1):
        if y.is_zero:
            failures.append(f"(b) y_{m} is zero")
            ratios.append((m, 0, N))
            continue
        rec = orbit(T, y, N - 1, budget)
        c = count_at_least(rec, math.log(m) + rec.lognorm_at(0), N)
        ratios.append((m, c, N))
        if c * m < (m - 1) * N:
            failures.append(f"(b) m={m}: ratio {c}/{N} < 1 - 1/{m}")
    return DCCReport(not failures, decs, tuple(ratios), tuple(failures))


# ---------------------------------------------------------------------------
# LYCC
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LYCCEvidence:
    cond_a: bool
    cond_b: bool
    subsequence: tuple[int, ...]
    growth: tuple[tuple[int, str, str], ...]  # (n, combination, log ||T^n y|| / ||y||)
    K: int
    failing: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.cond_a and self.cond_b

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict[str, Any]:
        return {
            "criterion": "LYCC",
            "cond_a": self.cond_a,
            "cond_b": self.cond_b,
            "K": self.K,
            "subsequence": [str(n) for n in self.subsequence],
            "growth": [{"n": str(n), "combination": c, "log_ratio": v} for n, c, v in self.growth],
            "failing": self.failing,
        }


def span_samples(X0: Sequence[SparseVector], depth: int = 3) -> list[tuple[str, SparseVector]]:
    """Nonzero {-1,0,1}-combinations with at most ``depth`` nonzero terms, up
    to global sign, labelled like '+0-2'."""
    out = []
    idx = range(len(X0))
    for r in range(1, min(depth, len(X0)) + 1):
        for subset in itertools.combinations(idx, r):
            for signs in itertools.product((1, -1), repeat=r - 1):
                sg = (1,) + signs
                y = linear_combination([(s, X0[j]) for s, j in zip(sg, subset)])
                if y.is_zero:
                    continue
                label = "".join(("+" if s > 0 else "-") + str(j) for s, j in zip(sg, subset))
                out.append((label, y))
    return out


def lycc_evidence(
    T: OperatorSpec,
    X0: Sequence[SparseVector],
    horizon: int,
    K: int = 3,
    depth: int = 3,
    budget: int = DEFAULT_BUDGET,
) -> LYCCEvidence:
    """(a) a common n_1 < n_2 < ... <= horizon with ||T^{n_k} x|| < 2^-k ||x||
    for every x in X0; (b) n_1 < n_2 < ... with ||T^{n_k} y|| > 2^k ||y|| for
    some normalised span sample y (a lower bound for ||T^n restricted to Y||)."""
    X0 = [x for x in X0 if not x.is_zero]
    if not X0:
        raise PreconditionViolation("X0 must contain a nonzero vector")
    recs = [orbit(T, x, horizon, budget) for x in X0]
    seq: list[int] = []
    pos = 1
    for k in range(1, K + 1):
        n: Optional[int] = pos
        while n is not None:
            hits = [r.first_below(r.lognorm_at(0) - k * LOG2, n) for r in recs]
            if any(h is None for h in hits):
                n = None
                break
            top = max(hits)  # type: ignore[type-var]
            if top == n:
                break
            n = top
        if n is None:
            break
        seq.append(n)
        pos = n + 1
    cond_a = len(seq) >= K
    samples = span_samples(X0, depth)
    srecs = [(lab, orbit(T, y, horizon, budget)) for lab, y in samples]
    growth = []
    pos = 1
    for k in range(1, K + 1):
        best = None
        for lab, r in srecs:
            h = r.first_above(r.lognorm_at(0) + k * LOG2, pos)
            if h is not None and (best is None or h < best[0]):
                best = (h, lab, r)
        if best is None:
            break
        h, lab, r = best
        growth.append((h, lab, to_decimal(r.lognorm_at(h) - r.lognorm_at(0))))
        pos = h + 1
    cond_b = len(growth) >= K
    failing = None if cond_a and cond_b else ("a" if not cond_a else "b")
    return LYCCEvidence(cond_a, cond_b, tuple(seq), tuple(growth), K, failing)
