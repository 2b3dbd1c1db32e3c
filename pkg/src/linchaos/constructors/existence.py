"""I + T on l^2 with T e_0 = 0, T e_{n+1} = w_n e_n, w_n = n^(-2/3), and the
counting statistics behind its distributional chaos.

For the orthonormal basis the binomial expansion is an orthogonal sum:
||(I+T)^i e_j||^2 = sum_{k=0}^{min(i,j)} (C(i,k) w_{j-k} ... w_{j-1})^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import gammaln

from ..errors import PreconditionViolation, ResourceLimitError
from ..operators import OperatorSpec, scalar_plus, weighted_backward_shift
from ..seqspace import WeightSequence, to_decimal

M_MAX = 6
SAMPLE_CAP = 10_000
ORACLE_I = 60
ORACLE_RTOL = 1e-10
EXPONENT = -2.0 / 3.0


def stage_N(k: int) -> int:
    """N_0 = 0, N_k = (k+1)! + 1."""
    return 0 if k == 0 else math.factorial(k + 1) + 1


def weight_at(n: int) -> float:
    """w_n = n^(-2/3) for n >= 1; w_0 := 1 (the formula is undefined at 0)."""
    return 1.0 if n == 0 else n**EXPONENT


def existence_weights() -> WeightSequence:
    """Backward-shift weights: entry a moves to a - 1 with factor w_{a-1}."""
    return WeightSequence.power_law(EXPONENT, 1.0, -1.0, prefix=(1.0, 1.0))


def existence_T() -> OperatorSpec:
    """I + T on l^2 (v = 1)."""
    return scalar_plus(1.0, weighted_backward_shift(existence_weights()))


class BinomialNorms:
    """log||(I+T)^i e_j|| for one j, vectorised over k."""

    def __init__(self, j: int) -> None:
        self.j = j
        logw = np.array([math.log(weight_at(n)) for n in range(j)])
        # P[k] = log(w_{j-k} ... w_{j-1}), k = 0..j
        self.P = np.concatenate(([0.0], np.cumsum(logw[::-1])))

    def log_norm(self, i: int) -> float:
        K = min(i, self.j)
        k = np.arange(K + 1)
        logc = gammaln(i + 1) - gammaln(k + 1) - gammaln(i - k + 1)
        t = 2.0 * (logc + self.P[: K + 1])
        top = float(t.max())
        return 0.5 * (top + math.log(float(np.exp(t - top).sum())))

    def log_norms(self, i_values: np.ndarray) -> np.ndarray:
        return np.array([self.log_norm(int(i)) for i in i_values])

    def direct_norm(self, i: int) -> float:
        """Linear-domain evaluation with exact integer binomials (i small)."""
        s = 0.0
        prod = 1.0
        for k in range(min(i, self.j) + 1):
            if k:
                prod *= weight_at(self.j - k)
            s += (math.comb(i, k) * prod) ** 2
        return math.sqrt(s)


def alpha_range(m: int) -> tuple[int, int]:
    """i = 3m([((m+2)!)^(2/3)] + 1) .. (m+2)! - (m+1)! - 2."""
    f2 = math.factorial(m + 2)
    lo = 3 * m * (int(math.floor(f2 ** (2.0 / 3.0))) + 1)
    return lo, f2 - math.factorial(m + 1) - 2


def b5_range(m: int) -> tuple[int, int]:
    """1 .. N_{m+1} - N_m - 2 (j - i stays above N_m)."""
    return 1, stage_N(m + 1) - stage_N(m) - 2


def beta_formula(m: int) -> float:
    """((m+1)! - m! - 2 - 3(m-1)([((m+1)!)^(2/3)] + 1)) / ((m+1)! + 1)."""
    f1 = math.factorial(m + 1)
    num = f1 - math.factorial(m) - 2 - 3 * (m - 1) * (int(math.floor(f1 ** (2.0 / 3.0))) + 1)
    return num / (f1 + 1)


def sample_points(lo: int, hi: int, cap: int = SAMPLE_CAP) -> np.ndarray:
    """All of [lo, hi] if it has at most cap points, else cap evenly spaced
    points with both endpoints."""
    if hi < lo:
        return np.array([], dtype=np.int64)
    if hi - lo + 1 <= cap:
        return np.arange(lo, hi + 1, dtype=np.int64)
    return np.unique(np.round(np.linspace(lo, hi, cap)).astype(np.int64))


@dataclass(frozen=True)
class RangeCheck:
    """||(I+T)^i e_j|| >= 1/2 i w_{j-1} on sampled i in [lo, hi]."""

    lo: int
    hi: int
    n_sampled: int
    min_log_margin: float  # min over samples of log||.|| - log(i w_{j-1} / 2)
    worst_i: int
    monotone: bool

    @property
    def vacuous(self) -> bool:
        return self.hi < self.lo

    @property
    def ok(self) -> bool:
        return self.vacuous or (self.min_log_margin >= 0 and self.monotone)

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"lo": str(self.lo), "hi": str(self.hi), "vacuous": self.vacuous, "ok": self.ok}
        if not self.vacuous:
            d.update(
                n_sampled=self.n_sampled,
                min_log_margin=to_decimal(self.min_log_margin),
                worst_i=str(self.worst_i),
                monotone=self.monotone,
            )
        return d


@dataclass(frozen=True)
class StageReport:
    m: int
    j: int
    N_m: int
    alpha: RangeCheck
    b5: RangeCheck
    crest_ok: bool  # 1/2 i w_{j-1} > m + 1 at the start of a non-vacuous alpha range
    count: int
    formula: float
    monotone_beta_range: bool

    @property
    def fraction(self) -> float:
        return self.count / self.N_m

    @property
    def exceeds_formula(self) -> bool:
        return self.formula <= 0 or self.fraction > self.formula

    def to_json(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "j": str(self.j),
            "N_m": str(self.N_m),
            "alpha": self.alpha.to_json(),
            "b5": self.b5.to_json(),
            "crest_ok": self.crest_ok,
            "beta": {
                "count": str(self.count),
                "N_m": str(self.N_m),
                "fraction": format(self.fraction, ".17g"),
                "formula": format(self.formula, ".17g"),
                "exceeds_formula": self.exceeds_formula,
            },
            "monotone_in_i": self.monotone_beta_range,
        }


@dataclass(frozen=True)
class ExistenceReport:
    operator: OperatorSpec
    stages: tuple[StageReport, ...]
    oracle_max_rel_err: float

    @property
    def fractions(self) -> list[float]:
        return [s.fraction for s in self.stages]

    def beta_nondecreasing(self, from_m: int = 1) -> bool:
        f = [s.fraction for s in self.stages if s.m >= from_m]
        return all(b >= a for a, b in zip(f, f[1:]))

    @property
    def alpha_ok(self) -> bool:
        return all(s.alpha.ok and s.b5.ok and s.crest_ok for s in self.stages)

    @property
    def oracle_ok(self) -> bool:
        return self.oracle_max_rel_err <= ORACLE_RTOL

    @property
    def ok(self) -> bool:
        return (
            self.alpha_ok
            and self.oracle_ok
            and self.beta_nondecreasing()
            and all(s.exceeds_formula and s.monotone_beta_range for s in self.stages)
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "operator": self.operator.to_json(),
            "stages": [s.to_json() for s in self.stages],
            "beta_nondecreasing": self.beta_nondecreasing(),
            "beta_nondecreasing_from_m2": self.beta_nondecreasing(2),
            "oracle_max_rel_err": format(self.oracle_max_rel_err, ".6g"),
            "ok": self.ok,
        }


def _range_check(bn: BinomialNorms, lo: int, hi: int, cap: int) -> RangeCheck:
    lo = max(lo, 1)
    pts = sample_points(lo, min(hi, bn.j), cap) if hi >= lo else np.array([], dtype=np.int64)
    if hi >= lo and not len(pts):
        raise PreconditionViolation("range lies beyond j", lo=lo, hi=hi, j=bn.j)
    if not len(pts):
        return RangeCheck(lo, hi, 0, math.inf, lo, True)
    vals = bn.log_norms(pts)
    bound = np.log(pts.astype(float)) + math.log(weight_at(bn.j - 1)) - math.log(2.0)
    margin = vals - bound
    w = int(np.argmin(margin))
    return RangeCheck(lo, hi, len(pts), float(margin[w]), int(pts[w]), bool(np.all(np.diff(vals) >= -1e-12)))


def existence_operator(m_max: int, *, sample_cap: int = SAMPLE_CAP) -> ExistenceReport:
    """Build I + T and verify, for m = 1..m_max with u_m = e_j, j = N_{m+1} - 1:
    the lower bound 1/2 i w_{j-1} on the alpha range of i (and on the
    range where j - i stays above N_m), the count
    (1/N_m) card{0 <= i < N_m : ||(I+T)^i u_m|| >= m} against its formula,
    and monotonicity in i.  Log-Gamma binomials are cross-checked against
    integer binomials for i <= 60."""
    if m_max < 1:
        raise PreconditionViolation("m_max must be >= 1", m_max=m_max)
    if m_max > M_MAX:
        raise ResourceLimitError(f"m_max={m_max} exceeds {M_MAX}: N_{m_max + 1} = {stage_N(m_max + 1)}")
    stages = []
    worst = 0.0
    for m in range(1, m_max + 1):
        j = stage_N(m + 1) - 1
        bn = BinomialNorms(j)
        N = stage_N(m)
        alpha = _range_check(bn, *alpha_range(m), sample_cap)
        b5 = _range_check(bn, *b5_range(m), sample_cap)
        crest = alpha.vacuous or 0.5 * alpha.lo * weight_at(j - 1) > m + 1
        i_all = np.arange(N)
        vals = bn.log_norms(i_all)
        count = int(np.count_nonzero(vals >= math.log(m) - 1e-12))
        mono = bool(np.all(np.diff(vals) >= -1e-12))
        for i in range(min(ORACLE_I, j) + 1):
            d = bn.direct_norm(i)
            worst = max(worst, abs(math.exp(bn.log_norm(i)) - d) / d)
        stages.append(StageReport(m, j, N, alpha, b5, crest, count, beta_formula(m), mono))
    return ExistenceReport(existence_T(), tuple(stages), worst)
