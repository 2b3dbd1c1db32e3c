"""Distributionally irregular vectors from DCC data, and dense
distributionally irregular manifolds built from their series terms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Optional, Sequence, Union

from ..criteria import decay_evidence
from ..errors import PreconditionViolation, ResourceLimitError
from ..operators import DEFAULT_BUDGET, OperatorSpec, OrbitRecord, orbit, weighted_backward_shift
from ..orbitstats import Certificate, Rejection, dirregular_test
from ..seqspace import NEG_INF, LogReal, SparseVector, WeightSequence, linear_combination
from .irregular import _log_opnorm, _normalized
from .plan import Check, Construction, SeriesPlan, SeriesTerm

# slack for "<=" / ">=" comparisons of log-norms that are equal in exact arithmetic
LE_SLACK = 1e-12
MAX_COMBINATIONS = 3**6 - 1


def _count(rec: OrbitRecord, thr: float, below: bool, n: int) -> int:
    """card{0 <= i < n : log||T^i x|| < thr} (below) or > thr."""
    return sum(b - a for a, b in rec.intervals(thr, below, 0, n - 1))


def _log_ratio(count: int, n: int) -> float:
    return math.log(count / n) if count else NEG_INF


def _next_odd_N(Ns: Sequence[int], K: int) -> int:
    """N_{2K+1} if given, else the least value the increasing gaps allow."""
    M = len(Ns)
    if 2 * K + 1 <= M:
        return Ns[2 * K]
    last, prev = Ns[-1], Ns[-2] if M >= 2 else 1
    return 2 * last - prev + 1


def dirregular_from_dcc(
    T: OperatorSpec,
    xs: Sequence[SparseVector],
    Ns: Sequence[int],
    *,
    strict: bool = True,
    eps: float = 0.5,
    density_floor: float = 0.75,
    K: int = 3,
    horizon: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> Construction:
    """x = sum_k ||T||^{-N_{2k-1}} x_{2k} over the 2k <= len(xs) available.

    Preconditions (N_0 := 1), checked by exact counting for m = 1..len(xs):
      growth: (1/N_m) card{i < N_m : ||T^i x_m|| > m ||T||^{N_{m-1}}} > 1 - 1/m,
      decay:  (1/N_m) card{i < N_m : ||T^i x_k|| < 1/m} > 1 - 1/m^2, k < m,
    with each x_m normalised and N_m - N_{m-1} increasing.  A failure
    raises PreconditionViolation (m, k, ratio); with ``strict=False`` it is
    recorded as a failed check and the series is still assembled.

    Checks on the truncated x: (1/N_{2m}) card{i < N_{2m} : ||T^i x|| >= m}
    > (m-1)/m and (1/N_{2m+1}) card{i < N_{2m+1} : ||T^i x|| <= 1/m}
    > 1 - 1/m; indices where the dropped terms may exceed 1/(2m) are not
    counted, and the rest are counted against m + 1/(2m) and 1/(2m).  Finally
    dirregular_test runs on x (horizon defaults to the last N).
    """
    M = len(xs)
    if len(Ns) != M:
        raise PreconditionViolation("need one N_m per x_m", xs=M, Ns=len(Ns))
    if M < 2:
        raise PreconditionViolation("range too short: need x_1, x_2 and N_1, N_2", m=M)
    Nfull = [1, *[int(n) for n in Ns]]
    gaps = [b - a for a, b in zip(Nfull, Nfull[1:])]
    if gaps[0] < 1 or any(b <= a for a, b in zip(gaps, gaps[1:])):
        raise PreconditionViolation("N_m - N_{m-1} must be positive and increasing", gaps=gaps)
    for m, x in enumerate(xs, start=1):
        if x.is_zero or not _normalized(T, x):
            raise PreconditionViolation(f"x_{m} is not normalised", m=m)
    lT = _log_opnorm(T)
    if not lT > 0:
        raise PreconditionViolation("DCC forces ||T|| > 1", log_norm=lT)

    Nmax = Nfull[-1]
    recs = [orbit(T, x, Nmax - 1, budget) for x in xs]
    pre: list[Check] = []
    for m in range(1, M + 1):
        N = Nfull[m]
        c1 = _count(recs[m - 1], math.log(m) + lT * Nfull[m - 1], False, N)
        pre.append(Check("growth: frac{i < N_m : ||T^i x_m|| > m ||T||^N_{m-1}} > 1 - 1/m", m, N, _log_ratio(c1, N), 1 - 1 / m, ">"))
        for k in range(1, m):
            c2 = _count(recs[k - 1], -math.log(m), True, N)
            pre.append(Check(f"decay: frac{{i < N_m : ||T^i x_{k}|| < 1/m}} > 1 - 1/m^2", m, N, _log_ratio(c2, N), 1 - 1 / m**2, ">"))
    bad = [c for c in pre if not c.ok]
    if bad and strict:
        c = bad[0]
        k = c.name.split("x_")[1].split("|")[0] if c.name.startswith("decay") else str(c.k)
        raise PreconditionViolation(
            f"{c.name.split(':')[0]} fails at m={c.k}: ratio {math.exp(c.log_value):.6g} <= {c.bound:.6g}",
            m=c.k,
            k=int(k),
            ratio=math.exp(c.log_value),
            required=c.bound,
        )

    Kt = M // 2
    terms = tuple(
        SeriesTerm(LogReal.from_log(-lT * Nfull[2 * k - 1]), xs[2 * k - 1], Nfull[2 * k]) for k in range(1, Kt + 1)
    )
    N_next = _next_odd_N(Ns, Kt)
    # sum_{k > K} ||T||^{i - N_{2k-1}} <= ||T||^{i - N_next} / (1 - 1/||T||)
    geo = -math.log1p(-math.exp(-lT))

    def tail(i: int) -> float:
        return (i - N_next) * lT + geo

    plan = SeriesPlan(
        "dirregular_from_dcc",
        terms,
        tuple(-lT * Nfull[2 * k - 1] for k in range(1, Kt + 1)),
        tail(Nmax - 1),
        (
            "frac{i < N_{2m} : ||T^i x|| >= m} > (m-1)/m",
            "frac{i < N_{2m+1} : ||T^i x|| <= 1/m} > 1 - 1/m",
        ),
        {"N_0": "1", "N_next_bound": str(N_next)},
    )
    x = plan.vector()
    rec = orbit(T, x, Nmax - 1, budget)
    checks = list(pre)

    def cut(m: int, N: int) -> int:
        # indices i < cut have dropped tail <= 1/(2m)
        return max(0, min(N, math.floor(N_next + (-math.log(2 * m) - geo) / lT) + 1))

    for m in range(1, Kt + 1):
        N = Nfull[2 * m]
        n = cut(m, N)
        c = n - _count(rec, math.log(m + 1 / (2 * m)) - LE_SLACK, True, n) if n else 0
        checks.append(Check("frac{i < N_{2m} : ||T^i x|| >= m} > (m-1)/m", m, N, _log_ratio(c, N), (m - 1) / m, ">"))
    for m in range(1, (M - 1) // 2 + 1):
        N = Nfull[2 * m + 1]
        n = cut(m, N)
        c = _count(rec, -math.log(2 * m) + LE_SLACK, True, n) if n else 0
        checks.append(Check("frac{i < N_{2m+1} : ||T^i x|| <= 1/m} > 1 - 1/m", m, N, _log_ratio(c, N), 1 - 1 / m, ">"))
    h = Nmax if horizon is None else horizon
    verdict = dirregular_test(T, x, h, eps, density_floor, K, budget=budget)
    return Construction(
        x,
        plan,
        tuple(checks),
        {"N": tuple(Ns)},
        {"preconditions_ok": not bad, "horizon": str(h)},
        verdict,
    )


def fast_growth_N(m_max: int) -> list[int]:
    """N_m = m^2 (2 N_{m-1} + 1) + 1, N_0 = 1: 4, 37, 676, 21649, ...

    With x_m = e_{2 N_m} under the weighted backward shift w = 2 both
    counting conditions hold: the orbit of x_k vanishes after 2 N_k + 1
    < N_m / m^2 steps, and x_m is above m 2^{N_{m-1}} on all but
    N_{m-1} + log2 m + 1 < N_m / m of [0, N_m).
    """
    Ns, prev = [], 1
    for m in range(1, m_max + 1):
        prev = m * m * (2 * prev + 1) + 1
        Ns.append(prev)
    return Ns


def doubling_shift_dcc_inputs(m_max: int, growth: str = "fast") -> tuple[OperatorSpec, list[SparseVector], list[int]]:
    """(B_w with w = 2 on l^2, x_m = e_{2 N_m}, N_m) with N_m = 4^m
    (growth='4^m') or fast_growth_N (growth='fast')."""
    if growth == "4^m":
        Ns = [4**m for m in range(1, m_max + 1)]
    elif growth == "fast":
        Ns = fast_growth_N(m_max)
    else:
        raise PreconditionViolation(f"unknown growth rule {growth!r}")
    T = weighted_backward_shift(WeightSequence.constant(2.0))
    return T, [SparseVector.basis(2 * N) for N in Ns], Ns


# ---------------------------------------------------------------------------
# masks and dense irregular manifolds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaskFamily:
    """Pairwise disjoint infinite index sets gamma_m, m = 1, 2, ... (k >= 1).

    kind 'two_adic': gamma_m = {k : the 2-adic valuation of k is m - 1}.
    kind 'periodic': gamma_m = {k : k mod period in classes[m]} for the
    listed m (every class non-empty, classes pairwise disjoint).
    """

    kind: str
    period: int = 0
    classes: Mapping[int, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind == "two_adic":
            return
        if self.kind != "periodic":
            raise PreconditionViolation(f"unknown mask kind {self.kind!r}")
        if self.period < 1:
            raise PreconditionViolation("period must be >= 1", period=self.period)
        seen: dict[int, int] = {}
        for m, cls in sorted(self.classes.items()):
            if not cls:
                raise PreconditionViolation(f"mask {m} is empty (masks must be infinite)", m=m)
            for r in cls:
                if not 0 <= r < self.period:
                    raise PreconditionViolation(f"residue {r} outside [0, {self.period})", m=m)
                if r in seen:
                    raise PreconditionViolation(f"masks {seen[r]} and {m} overlap at residue {r}", m=m, other=seen[r])
                seen[r] = m

    @classmethod
    def two_adic(cls) -> MaskFamily:
        return cls("two_adic")

    @classmethod
    def residues(cls, n: int) -> MaskFamily:
        """gamma_m = {k : k = m mod n}, m = 1..n."""
        return cls("periodic", n, {m: frozenset({m % n}) for m in range(1, n + 1)})

    @classmethod
    def periodic(cls, period: int, classes: Mapping[int, Sequence[int]]) -> MaskFamily:
        return cls("periodic", period, {int(m): frozenset(int(r) for r in c) for m, c in classes.items()})

    @property
    def defined(self) -> Optional[int]:
        """Largest m with a mask (None: every m)."""
        return None if self.kind == "two_adic" else max(self.classes, default=0)

    def contains(self, m: int, k: int) -> bool:
        if k < 1 or m < 1:
            return False
        if self.kind == "two_adic":
            return (k & -k).bit_length() == m
        cls = self.classes.get(m)
        return cls is not None and k % self.period in cls

    def members(self, m: int, limit: int) -> list[int]:
        """Elements of gamma_m that are <= limit."""
        return [k for k in range(1, limit + 1) if self.contains(m, k)]

    def first(self, m: int) -> int:
        """Smallest element of gamma_m."""
        if self.kind == "two_adic":
            return 1 << (m - 1)
        if m not in self.classes:
            raise PreconditionViolation(f"no mask {m}", m=m)
        return min((r if r else self.period) for r in self.classes[m])

    def to_json(self) -> dict[str, Any]:
        if self.kind == "two_adic":
            return {"kind": "two_adic"}
        return {
            "kind": "periodic",
            "period": self.period,
            "classes": {str(m): sorted(c) for m, c in sorted(self.classes.items())},
        }


Coeffs = tuple[int, ...]
Verdict = Union[Certificate, Rejection]


@dataclass(frozen=True)
class ManifoldReport:
    zs: tuple[SparseVector, ...]
    us: tuple[SparseVector, ...]
    assignment: tuple[tuple[int, ...], ...]  # series-term indices k in each u_m
    results: tuple[tuple[Coeffs, Verdict], ...]
    params: dict[str, str]

    @property
    def ok(self) -> bool:
        return all(v.accepted for _, v in self.results)

    def failures(self) -> list[tuple[Coeffs, Verdict]]:
        return [(c, v) for c, v in self.results if not v.accepted]

    def to_json(self) -> dict[str, Any]:
        return {
            "zs": [z.to_json() for z in self.zs],
            "assignment": [list(a) for a in self.assignment],
            "params": dict(sorted(self.params.items())),
            "combinations": [
                {"coeffs": list(c), "accepted": v.accepted, **({} if v.accepted else {"rejection": v.to_json()})}
                for c, v in self.results
            ],
            "ok": self.ok,
        }


def sign_combinations(m_max: int) -> Iterator[Coeffs]:
    """Nonzero (c_1..c_m_max) in {-1, 0, 1}^m_max, lexicographic in (0, 1, -1)."""
    for c in itertools.product((0, 1, -1), repeat=m_max):
        if any(c):
            yield c


def dense_irregular_manifold(
    T: OperatorSpec,
    ys: Sequence[SparseVector],
    x_terms: Sequence[SeriesTerm],
    M: MaskFamily,
    m_max: int,
    *,
    eps: float = 0.5,
    density_floor: float = 0.7,
    K: int = 3,
    horizon: Optional[int] = None,
    verify: bool = True,
    probe_horizon: int = 1 << 16,
    budget: int = DEFAULT_BUDGET,
) -> ManifoldReport:
    """z_m = y_m + u_m / m with u_m = sum_{k in gamma_m} x_k, m = 1..m_max.

    x_k = coef_k vector_k are the (1-based) series terms of a
    distributionally irregular vector.  Every mask must contain one of the
    supplied k, and each y_m must have a decaying orbit.  The verification
    runs dirregular_test on every nonzero {-1, 0, 1}-combination of the z_m
    (horizon defaults to the largest term source index).
    """
    if m_max < 1:
        raise PreconditionViolation("m_max must be >= 1", m_max=m_max)
    if len(ys) < m_max:
        raise PreconditionViolation("need y_1..y_m_max", ys=len(ys), m_max=m_max)
    if M.defined is not None and M.defined < m_max:
        raise PreconditionViolation(f"mask family defines only {M.defined} masks", m_max=m_max)
    if 3**m_max - 1 > MAX_COMBINATIONS and verify:
        raise ResourceLimitError(f"{3**m_max - 1} combinations exceed the cap {MAX_COMBINATIONS}")
    nK = len(x_terms)
    assignment = []
    for m in range(1, m_max + 1):
        ks = M.members(m, nK)
        if not ks:
            raise PreconditionViolation(
                f"mask {m} has no series term among k <= {nK} (first member {M.first(m)})",
                m=m,
                needed=M.first(m),
                available=nK,
            )
        assignment.append(tuple(ks))
    for m, y in enumerate(ys[:m_max], start=1):
        if not decay_evidence(T, y, probe_horizon, budget).decays:
            raise PreconditionViolation(f"y_{m} has no decaying orbit", m=m)
    us = [linear_combination((x_terms[k - 1].coef, x_terms[k - 1].vector) for k in ks) for ks in assignment]
    zs = [linear_combination([(LogReal.of(1.0), y), (LogReal.of(1.0 / m), u)]) for m, (y, u) in enumerate(zip(ys, us), start=1)]
    h = horizon if horizon is not None else max(t.source for t in x_terms)
    results = []
    if verify:
        for c in sign_combinations(m_max):
            v = linear_combination((LogReal.of(float(cm)), z) for cm, z in zip(c, zs) if cm)
            results.append((c, dirregular_test(T, v, h, eps, density_floor, K, budget=budget)))
    params = {"eps": repr(eps), "density_floor": repr(density_floor), "K": str(K), "horizon": str(h), "m_max": str(m_max)}
    return ManifoldReport(tuple(zs), tuple(us), tuple(assignment), tuple(results), params)
