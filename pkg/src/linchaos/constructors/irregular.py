"""Irregular vectors from bounded oscillation and from the LYCC."""

from __future__ import annotations

import math
from typing import Callable, Iterable, Optional, Sequence, Union

from ..errors import PreconditionViolation, SelectionFailure
from ..operators import DEFAULT_BUDGET, OperatorSpec, OrbitRecord, orbit, power_norm_bracket, shift_lognorm_at
from ..seqspace import LOG2, NEG_INF, ConstantTail, LogReal, SparseVector, logsumexp, norm
from .plan import Check, Construction, SeriesPlan, SeriesTerm

LOG4 = 2 * LOG2
LOG3 = math.log(3.0)
_LEAPFROG_CAP = 100_000
GALLOP_JUMPS = 2000
NORM_TOL = 1e-9


def _log_opnorm(T: OperatorSpec) -> float:
    return power_norm_bracket(T, 1).upper.logmag


def lognorm_at(T: OperatorSpec, y: SparseVector, n: int, budget: int = DEFAULT_BUDGET) -> float:
    """log||T^n y||: closed form for shifts, orbit enumeration otherwise."""
    if y.is_zero or (T.is_shift and T.direction < 0 and n > y.max_index):
        return NEG_INF
    if T.is_shift:
        return shift_lognorm_at(T, y, n)
    return orbit(T, y, n, budget).lognorm_at(n)


class OrbitOracle:
    """log||T^n x|| with first-crossing searches up to a horizon.

    A single-entry x under a weighted forward shift on l^p(v) / c_0(v) with
    constant v is handled in closed form (the orbit is a running weight
    product, searched period by period), so indices far beyond any
    enumerable horizon are reachable.  Everything else uses an orbit record.
    """

    def __init__(self, T: OperatorSpec, x: SparseVector, horizon: int, budget: int = DEFAULT_BUDGET) -> None:
        self.T, self.x, self.horizon = T, x, horizon
        v = T.space.v
        self.closed = (
            T.kind == "WeightedForwardShift"
            and len(x) == 1
            and v.P == 0
            and isinstance(v.tail, ConstantTail)
        )
        self.rec: Optional[OrbitRecord] = None
        if self.closed:
            (a, c), = list(x)
            self.a = a
            self.base = c.logmag + T.space.v_exponent * v.log_at(0)
        else:
            self.rec = orbit(T, x, horizon, budget)

    def at(self, n: int) -> float:
        if self.closed:
            assert self.T.w is not None
            return self.base + self.T.w.log_range(self.a, self.a + n)
        assert self.rec is not None
        return self.rec.lognorm_at(n)

    def first_below(self, thr: float, start: int) -> Optional[int]:
        if start > self.horizon:
            return None
        if self.closed:
            assert self.T.w is not None
            t = self.T.w.first_cumlog_below(self.a, thr - self.base, self.a + start)
            hit = None if t is None else t - self.a
        else:
            assert self.rec is not None
            hit = self.rec.first_below(thr, start)
        return hit if hit is not None and hit <= self.horizon else None

    def first_above(self, thr: float, start: int) -> Optional[int]:
        if start > self.horizon:
            return None
        if self.closed:
            assert self.T.w is not None
            t = self.T.w.first_cumlog_above(self.a, thr - self.base, self.a + start)
            hit = None if t is None else t - self.a
        else:
            assert self.rec is not None
            hit = self.rec.first_above(thr, start)
        return hit if hit is not None and hit <= self.horizon else None

    def log_sup(self, probe: int = 4096) -> float:
        """log max_{n <= horizon} ||T^n x||; raises if the orbit is unbounded."""
        if not self.closed:
            assert self.rec is not None
            return self.rec.extreme(0, self.horizon + 1, largest=True)[1]
        top = max(self.at(n) for n in range(min(probe, self.horizon) + 1))
        beyond = self.first_above(top + 1e-12, 0)
        if beyond is not None:
            raise PreconditionViolation(
                "orbit norms exceed every probed maximum: x is not bounded within the horizon", index=beyond
            )
        return top


class _Stalled(Exception):
    pass


def _leapfrog(
    oracle: OrbitOracle, offsets: Sequence[int], thresholds: Sequence[float], start: int, cap: int = _LEAPFROG_CAP
) -> Optional[int]:
    """Smallest t >= start with log||T^{o_j + t} x|| < thr_j for every j
    (None past the horizon; _Stalled after ``cap`` jumps)."""
    t = start
    for _ in range(cap):
        moved = False
        for o, thr in zip(offsets, thresholds):
            hit = oracle.first_below(thr, o + t)
            if hit is None:
                return None
            if hit - o > t:
                t = hit - o
                moved = True
        if not moved:
            return t
    raise _Stalled


def _galloping_leapfrog(
    oracle: OrbitOracle, offsets: Sequence[int], thresholds: Sequence[float], start: int
) -> Optional[int]:
    """Leapfrog from start; when it stalls, restart at doubled positions
    (sparse simultaneous lows get denser further out)."""
    s = start
    while True:
        try:
            return _leapfrog(oracle, offsets, thresholds, s, GALLOP_JUMPS)
        except _Stalled:
            s *= 2
            if s > oracle.horizon:
                return None


# ---------------------------------------------------------------------------
# bounded oscillation -> irregular vector
# ---------------------------------------------------------------------------


def irregular_from_bounded_oscillation(
    T: OperatorSpec,
    x: SparseVector,
    delta: float,
    horizon: int,
    K: int = 4,
    *,
    budget: int = DEFAULT_BUDGET,
) -> Construction:
    """u = sum_{j=0}^K T^{n_{2j}} x / (4^j ||T||^{n_{2j-1}} ||T^{n_{2j}} x||), n_{-1} = n_0 = 0.

    x must oscillate: liminf ||T^n x|| = 0 and ||T^m x|| > delta infinitely
    often, with M = sup ||T^n x|| finite.  Indices are chosen greedily
    (smallest admissible, bounds halved for safety):
      n_{2k}    ||T^{n_{2k}} x|| < 4^-k and the crest inequality
                delta c_k - sum_{j<k} M c_j > k holds,
      m         first ||T^m x|| > delta after each n,
      n_{2k+1}  sum_{j<=k} c_j ||T^{n_{2j} + n_{2k+1}} x|| < ||T^{n_{2k}} x||,
    with c_j = 1 / (4^j ||T||^{n_{2j-1}} ||T^{n_{2j}} x||).

    Checks, for k = 1..K: ||T^{n_{2k+1}} u|| < 2^-k and
    ||T^{m_{2k} - n_{2k}} u|| > k - 4^-k, with the dropped terms j > K
    charged at sum_{j>K} 4^-j = 4^-K / 3.
    """
    if not delta > 0:
        raise PreconditionViolation("delta must be > 0", delta=delta)
    if K < 1:
        raise PreconditionViolation("K must be >= 1", K=K)
    if x.is_zero:
        raise PreconditionViolation("x must be nonzero")
    orb = OrbitOracle(T, x, horizon, budget)
    logM = orb.log_sup()
    ld = math.log(delta)
    lT = _log_opnorm(T)
    L0 = orb.at(0)

    ns: list[int] = [0]  # n_0; n_{-1} = 0 is implicit
    ms: list[int] = []  # m_1, m_2, ...
    logc: list[float] = [-L0]  # log c_0 = -log||x||

    def fail(msg: str, level: int, **kw: object) -> SelectionFailure:
        return SelectionFailure(msg, level - 1, level=level, **kw)

    for k in range(0, K + 1):
        # n_{2k+1}: every shifted term small against ||T^{n_{2k}} x||
        start = (ms[-1] if ms else ns[-1]) + 1
        thr = orb.at(ns[2 * k]) - math.log(2 * (k + 1)) - LOG2
        offs = [ns[2 * j] for j in range(k + 1)]
        n_odd = _galloping_leapfrog(orb, offs, [thr - logc[j] for j in range(k + 1)], start)
        if n_odd is None:
            raise fail(f"no n_{2 * k + 1} within the horizon", max(k, 1), index=2 * k + 1)
        ns.append(n_odd)
        if k == K:
            break
        # m_{2k+1}
        m = orb.first_above(ld, n_odd + 1)
        if m is None:
            raise fail(f"no m_{2 * k + 1} with ||T^m x|| > delta", k + 1, index=2 * k + 1)
        ms.append(m)
        # n_{2k+2}, level k' = k + 1
        kk = k + 1
        S = logsumexp([logM + logc[j] for j in range(kk)])
        crest = ld - kk * LOG4 - lT * ns[2 * kk - 1] - logsumexp([math.log(kk), S])
        thr = min(-kk * LOG4, crest) - LOG2
        n_even = orb.first_below(thr, m + 1)
        if n_even is None:
            raise fail(f"no n_{2 * kk} within the horizon", kk, index=2 * kk)
        ns.append(n_even)
        logc.append(-(kk * LOG4 + lT * ns[2 * kk - 1] + orb.at(n_even)))
        # m_{2k+2}
        m = orb.first_above(ld, n_even + 1)
        if m is None:
            raise fail(f"no m_{2 * kk} with ||T^m x|| > delta", kk, index=2 * kk)
        ms.append(m)

    # terms: coefficient c_j, vector T^{n_{2j}} x (norm 1 / (4^j ||T||^{n_{2j-1}}))
    terms, lognorms = [], []
    vec_terms = []
    for j in range(K + 1):
        v = _power_vector(T, x, ns[2 * j], budget)
        terms.append(SeriesTerm(LogReal.from_log(logc[j]), v, ns[2 * j]))
        lognorms.append(logc[j] + orb.at(ns[2 * j]))
        vec_terms.append(v)
    log_tail = -(K + 1) * LOG4 - math.log1p(-0.25)  # sum_{j>K} 4^-j
    plan = SeriesPlan(
        "irregular_from_bounded_oscillation",
        tuple(terms),
        tuple(lognorms),
        log_tail,
        ("||T^{n_{2k+1}} u|| < 2^-k", "||T^{m_{2k}-n_{2k}} u|| > k - 4^-k"),
        {"delta": format(delta, ".17g"), "K": str(K), "horizon": str(horizon), "log_M": format(logM, ".17g")},
    )
    u = plan.vector()
    checks = []
    for k in range(1, K + 1):
        n = ns[2 * k + 1]
        checks.append(Check("||T^{n_{2k+1}} u|| < 2^-k", k, n, lognorm_at(T, u, n, budget), 2.0**-k, "<", log_tail))
        p = ms[2 * k - 1] - ns[2 * k]
        checks.append(
            Check("||T^{m_{2k}-n_{2k}} u|| > k - 4^-k", k, p, lognorm_at(T, u, p, budget), k - 4.0**-k, ">", log_tail)
        )
    return Construction(
        u,
        plan,
        tuple(checks),
        {"n": tuple(ns), "m": tuple(ms)},
        {"closed_form": orb.closed, "log_opnorm": format(lT, ".17g")},
    )


def _power_vector(T: OperatorSpec, x: SparseVector, n: int, budget: int) -> SparseVector:
    from ..operators import apply_power, shift_power

    if T.is_shift:
        return shift_power(T, x, n)
    return apply_power(T, x, n)


# ---------------------------------------------------------------------------
# LYCC -> irregular vector
# ---------------------------------------------------------------------------

IRule = Union[str, Sequence[int]]


def _normalized(T: OperatorSpec, u: SparseVector) -> bool:
    return abs(norm(u, T.space).logmag) <= NORM_TOL


def _log_sup_orbit(T: OperatorSpec, u: SparseVector, probe: int, budget: int) -> float:
    if T.is_shift and T.direction < 0:
        probe = u.max_index + 1  # the orbit is zero afterwards: the maximum is exact
    rec = orbit(T, u, probe, budget)
    return rec.extreme(0, probe + 1, largest=True)[1]


def greedy_index_set(lT: float, ns: Sequence[int], limit: int) -> list[int]:
    """Smallest I in {1..limit} (1-based) with 2^i > 2 * 2^j ||T||^{n_j} for j < i in I."""
    out: list[int] = []
    need = -math.inf
    for i in range(1, limit + 1):
        if i * LOG2 > need:
            out.append(i)
            need = max(need, LOG2 + i * LOG2 + lT * ns[i - 1])
    return out


def _next_admissible(lT: float, ns: Sequence[int], I: Sequence[int]) -> int:
    need = max(LOG2 + j * LOG2 + lT * ns[j - 1] for j in I)
    return math.floor(need / LOG2) + 1


def irregular_from_lycc(
    T: OperatorSpec,
    us: Sequence[SparseVector],
    ms: Sequence[int],
    ns: Sequence[int],
    I: IRule = "greedy",
    *,
    probe_horizon: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> Construction:
    """u = sum_{i in I} 2^-i u_i.

    Preconditions, checked for j, k <= J = len(us) (1-based):
      (a)' ||T^{n_k} u_j|| < 1/j for j <= k,
      (b)' ||T^{m_j} u_j|| > 3^j M_{j-1} for j > 1, M_j = sup_{i<=j, n>=0} ||T^n u_i||,
      m_1 < n_1 < m_2 < n_2 < ..., each u_j normalised,
      I growth rule: i > j in I implies 2^i > 2^j ||T||^{n_j}.
    ``I`` is 'greedy' (smallest admissible set, factor 2 margin),
    'every_other' (every second greedy index) or an explicit list.

    Checks for j in I: ||T^{m_j} u|| > ((3/2)^j - 1) M_{j-1} - 2^{1-j} and
    ||T^{n_j} u|| < 1/j + 2^{1-j}; dropped terms i > max I are charged at
    2^{1-i_next} ||T||^n with i_next the next admissible index.
    """
    J = len(us)
    if J < 1 or len(ms) != J or len(ns) != J:
        raise PreconditionViolation("us, ms, ns must be non-empty and of equal length")
    inter = [v for pair in zip(ms, ns) for v in pair]
    if inter[0] < 0 or any(b <= a for a, b in zip(inter, inter[1:])):
        raise PreconditionViolation("need 0 <= m_1 < n_1 < m_2 < n_2 < ...")
    for j, u in enumerate(us, start=1):
        if u.is_zero or not _normalized(T, u):
            raise PreconditionViolation(f"u_{j} is not normalised", j=j)
    probe = probe_horizon if probe_horizon is not None else 2 * max(ns) + 16
    sups = [_log_sup_orbit(T, u, probe, budget) for u in us]
    logM = [NEG_INF]  # M_0 = 0
    for s in sups:
        logM.append(max(logM[-1], s))
    # (a)'
    for k in range(1, J + 1):
        for j in range(1, k + 1):
            if not lognorm_at(T, us[j - 1], ns[k - 1], budget) < -math.log(j):
                raise PreconditionViolation(f"(a)' fails: ||T^(n_{k}) u_{j}|| >= 1/{j}", j=j, k=k)
    # (b)'
    for j in range(2, J + 1):
        if not lognorm_at(T, us[j - 1], ms[j - 1], budget) > j * LOG3 + logM[j - 1]:
            raise PreconditionViolation(f"(b)' fails: ||T^(m_{j}) u_{j}|| <= 3^{j} M_{j - 1}", j=j, k=j)
    lT = _log_opnorm(T)
    if isinstance(I, str):
        greedy = greedy_index_set(lT, ns, J)
        if I == "greedy":
            idx = greedy
        elif I == "every_other":
            idx = greedy[::2]
        else:
            raise PreconditionViolation(f"unknown index rule {I!r}")
    else:
        idx = sorted(int(i) for i in I)
        if not idx or idx[0] < 1 or idx[-1] > J or len(set(idx)) != len(idx):
            raise PreconditionViolation("explicit I must be distinct indices in 1..J")
        for a, i in enumerate(idx):
            for j in idx[:a]:
                if not i * LOG2 > j * LOG2 + lT * ns[j - 1]:
                    raise PreconditionViolation(f"growth rule fails for i={i}, j={j}", j=j, k=i)
    i_next = _next_admissible(lT, ns, idx)
    terms = tuple(SeriesTerm(LogReal.from_log(-i * LOG2), us[i - 1], i) for i in idx)
    plan = SeriesPlan(
        "irregular_from_lycc",
        terms,
        tuple(-i * LOG2 for i in idx),
        (1 - i_next) * LOG2 + lT * max(ns[i - 1] for i in idx),
        ("||T^{m_j} u|| > ((3/2)^j - 1) M_{j-1} - 2^{1-j}", "||T^{n_j} u|| < 1/j + 2^{1-j}"),
        {"I": ",".join(map(str, idx)), "i_next": str(i_next)},
    )
    u = plan.vector()
    checks = []
    for j in idx:
        m, n = ms[j - 1], ns[j - 1]
        # ((3/2)^j - 1) M_{j-1} - 2^{1-j} in the log domain
        grow = j * math.log(1.5) + math.log1p(-(1.5**-j))
        lower = LogReal.from_log(grow + logM[j - 1]) - LogReal.of(2.0 ** (1 - j))
        tail_m = (1 - i_next) * LOG2 + lT * m
        tail_n = (1 - i_next) * LOG2 + lT * n
        checks.append(Check.of("||T^{m_j} u|| > ((3/2)^j - 1) M_{j-1} - 2^{1-j}", j, m, lognorm_at(T, u, m, budget), lower, ">", tail_m))
        checks.append(Check("||T^{n_j} u|| < 1/j + 2^{1-j}", j, n, lognorm_at(T, u, n, budget), 1 / j + 2.0 ** (1 - j), "<", tail_n))
    return Construction(
        u,
        plan,
        tuple(checks),
        {"I": tuple(idx), "m": tuple(ms), "n": tuple(ns)},
        {"log_M": [format(x, ".17g") for x in logM[1:]]},
    )


Candidates = Union[Iterable[SparseVector], Callable[[int, int], Iterable[SparseVector]]]


def lycc_sequences(
    T: OperatorSpec,
    candidates: Candidates,
    J: Optional[int] = None,
    *,
    until: Optional[Callable[[list[int]], bool]] = None,
    probe_horizon: int = 1 << 22,
    budget: int = DEFAULT_BUDGET,
) -> tuple[list[SparseVector], list[int], list[int]]:
    """Greedy (u_j, m_j, n_j), j = 1, 2, ..., meeting (a)' and (b)' with factor 2.

    Candidates are normalised and tried in order; u_j is the first whose
    orbit passes 2 * 3^j M_{j-1} after n_{j-1} (for j = 1: its largest
    value), m_j the first such index, and n_j the first index after m_j
    where every u_i (i <= j) is below 1/(2i).  ``candidates`` may be a
    callable (j, start) -> iterable.  Stops after J terms or once
    ``until(ns)`` holds.
    """
    if J is None and until is None:
        raise ValueError("give J or until")
    us: list[SparseVector] = []
    ms: list[int] = []
    ns: list[int] = []
    recs: list[OrbitRecord] = []
    logM = NEG_INF
    shared = None if callable(candidates) else iter(candidates)
    # backward-shift orbits of finitely supported vectors end at zero
    dies = T.is_shift and T.direction < 0
    live: list[int] = []
    j = 0
    while (J is None or j < J) and not (until is not None and ns and until(ns)):
        j += 1
        start = ns[-1] + 1 if ns else 0
        it = shared if shared is not None else iter(candidates(j, start))  # type: ignore[operator]
        bar = LOG2 + j * LOG3 + logM
        while True:
            try:
                c = next(it)
            except StopIteration:
                raise SelectionFailure(f"candidates exhausted at j={j}", j - 1) from None
            if c.is_zero:
                continue
            c = c.scale(LogReal.from_log(-norm(c, T.space).logmag))
            h = probe_horizon
            if T.is_shift and T.direction < 0:
                h = min(h, c.max_index + 1)
            if h < start:
                continue
            rec = orbit(T, c, h, budget)
            if j > 1:
                m = rec.first_above(bar, start)
            else:
                m, top = rec.extreme(start, h + 1, largest=True)
                m = m if top > NEG_INF else None
            if m is not None:
                break
        us.append(c)
        ms.append(m)
        recs.append(rec)
        n = m + 1
        if dies:
            live = [i for i in live if recs[i - 1].horizon > n or recs[i - 1].lognorm_at(recs[i - 1].horizon) > NEG_INF]
        live.append(j)
        for _ in range(_LEAPFROG_CAP):
            hits = []
            for i in live:
                r = recs[i - 1]
                hit = r.first_below(-math.log(i) - LOG2, min(n, r.horizon))
                hits.append(None if hit is None else max(hit, n))
            if any(h is None for h in hits):
                raise SelectionFailure(f"no n_{j} within the probe horizon", j - 1)
            top = max(hits)  # type: ignore[type-var]
            if top == n:
                break
            n = top
        ns.append(n)
        logM = max(logM, rec.extreme(0, rec.horizon + 1, largest=True)[1])
    return us, ms, ns


def backward_shift_irregular_seed(
    T: OperatorSpec, n_terms: int = 4, *, I: IRule = "greedy", budget: int = DEFAULT_BUDGET
) -> Construction:
    """Irregular vector for a backward shift with M_v = inf (or M_w = inf).

    Follows the characterisation of Li-Yorke chaotic backward shifts: the
    supremum criterion must report 'infinite'; normalised basis vectors
    e_q supply the LYCC sequences (their orbits die after q steps), and the
    sequences are extended until the greedy index set has ``n_terms``
    elements ('every_other' then keeps every second one).
    """
    from ..criteria import compute_Mv, compute_Mw

    if not (T.is_shift and T.direction < 0):
        raise PreconditionViolation("expected a backward shift")
    verdict = compute_Mv(T.space.v) if T.kind == "BackwardShift" else compute_Mw(T.w)  # type: ignore[arg-type]
    if not verdict.is_infinite:
        raise PreconditionViolation(f"{verdict.name} is {verdict.verdict}: no Li-Yorke chaos", verdict=verdict.verdict)
    lT = _log_opnorm(T)
    
    def cands(j: int, start: int) -> Iterable[SparseVector]:
        # galloping over q: a larger q only delays the death of e_q
        step = 1
        q = start
        while True:
            yield SparseVector.basis(q)
            q += step
            step *= 2

    def enough(ns: list[int]) -> bool:
        return len(greedy_index_set(lT, ns, len(ns))) >= n_terms

    us, ms, ns = lycc_sequences(T, cands, until=enough, budget=budget)
    c = irregular_from_lycc(T, us, ms, ns, I, budget=budget)
    c.notes["supremum"] = verdict.to_json()
    return c
