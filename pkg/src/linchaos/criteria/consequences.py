"""Summability of 1/||T^{m_k}|| and spectral consistency of certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence, Union

from ..errors import PreconditionViolation
from ..operators import OperatorSpec, power_norm_bracket, spectral_radius_estimate
from ..orbitstats import Certificate, IndexSet
from ..seqspace import logsumexp, to_decimal
from .witnesses import SDCCWitness

SPECTRAL_TOL = 1e-9

IndexRule = Union[IndexSet, Sequence[int], Callable[[int], int]]


@dataclass(frozen=True)
class SummabilityVerdict:
    """Partial sums of a_k = ||T^{m_k}||^-power, k = 1..K.

    Certified iff the term ratios stay <= q < 1 from some k0 on; the tail
    after K is then bounded by a_K q / (1 - q) and added to the total.
    """

    power: int
    verdict: str  # 'SummableCertified' | 'NotCertified'
    indices: tuple[int, ...]
    log_terms: tuple[float, ...]
    log_partial_sum: float
    k0: Optional[int] = None
    q: Optional[float] = None
    log_tail_bound: Optional[float] = None

    @property
    def certified(self) -> bool:
        return self.verdict == "SummableCertified"

    @property
    def total(self) -> float:
        """Partial sum plus the certified tail bound (partial sum alone if uncertified)."""
        parts = [self.log_partial_sum]
        if self.log_tail_bound is not None:
            parts.append(self.log_tail_bound)
        return math.exp(logsumexp(parts))

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "power": self.power,
            "verdict": self.verdict,
            "m": [str(m) for m in self.indices],
            "log_terms": [to_decimal(t) for t in self.log_terms],
            "log_partial_sum": to_decimal(self.log_partial_sum),
        }
        if self.certified:
            d.update(
                k0=self.k0,
                q=format(self.q, ".17g"),
                log_tail_bound=to_decimal(self.log_tail_bound),  # type: ignore[arg-type]
                total=format(self.total, ".17g"),
            )
        return d


@dataclass(frozen=True)
class SummabilityReport:
    first: SummabilityVerdict  # sum 1/||T^{m_k}||
    squared: SummabilityVerdict  # sum 1/||T^{m_k}||^2 (Hilbert-space variant)

    def to_json(self) -> dict[str, Any]:
        return {"sum_inverse_norms": self.first.to_json(), "sum_inverse_norms_squared": self.squared.to_json()}


def _indices(B: IndexRule, K: int) -> list[int]:
    if callable(B):
        out = [int(B(k)) for k in range(1, K + 1)]
    else:
        out = []
        for n in B:
            if n >= 1:
                out.append(int(n))
            if len(out) == K:
                break
    if len(out) < K:
        raise PreconditionViolation(f"index rule yields only {len(out)} of {K} indices")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise PreconditionViolation("indices must be strictly increasing")
    return out


def _geometric_certificate(power: int, ms: list[int], logs: list[float]) -> SummabilityVerdict:
    terms = [-power * x for x in logs]
    psum = logsumexp(terms)
    ratios = [b - a for a, b in zip(terms, terms[1:])]
    for k0 in range(len(ratios)):
        lq = max(ratios[k0:])
        if lq < 0:
            q = math.exp(lq)
            tail = terms[-1] + lq - math.log1p(-q)
            return SummabilityVerdict(power, "SummableCertified", tuple(ms), tuple(terms), psum, k0 + 1, q, tail)
    return SummabilityVerdict(power, "NotCertified", tuple(ms), tuple(terms), psum)


def series_summability_test(T: OperatorSpec, B: IndexRule, K: int) -> SummabilityReport:
    """Partial sums of 1/||T^{m_k}|| and 1/||T^{m_k}||^2 for the first K
    indices of B, each with a geometric-decay certificate when one exists."""
    if K < 2:
        raise PreconditionViolation("K must be >= 2")
    ms = _indices(B, K)
    logs = []
    for m in ms:
        pn = power_norm_bracket(T, m)
        if not pn.exact:
            raise PreconditionViolation(f"||T^{m}|| is not available exactly", m=m)
        logs.append(pn.upper.logmag)
    return SummabilityReport(_geometric_certificate(1, ms, logs), _geometric_certificate(2, ms, logs))


# ---------------------------------------------------------------------------
# spectral consistency
# ---------------------------------------------------------------------------

LI_YORKE_CLAIMS = {
    "LiYorkePair",
    "IrregularVector",
    "DistributionallyIrregularVector",
    "ScrambledLine",
    "DistributionalChaos",
}


@dataclass(frozen=True)
class ConsistencyReport:
    ok: bool
    log_radius_upper: float
    checks: tuple[dict[str, Any], ...]

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict[str, Any]:
        return {"ok": self.ok, "log_radius_upper": to_decimal(self.log_radius_upper), "checks": list(self.checks)}


def spectral_consistency_check(T: OperatorSpec, certificates: Iterable[Certificate | SDCCWitness]) -> ConsistencyReport:
    """Necessary spectral consequences of accepted evidence.

    Li-Yorke chaos forces the spectrum to meet the unit circle, hence
    r(T) >= 1; an SDCC witness with constant r forces r(T) >= r.  A failure
    means a detector or the radius estimate is wrong.
    """
    est = spectral_radius_estimate(T)
    lr = est.upper.logmag
    checks = []
    ok = True
    for c in certificates:
        if isinstance(c, SDCCWitness):
            need, what = c.r, "SDCC"
        elif isinstance(c, Certificate):
            if c.claim not in LI_YORKE_CLAIMS:
                continue
            need, what = 1.0, c.claim
        else:
            raise TypeError(f"cannot check {type(c).__name__}")
        r_up = math.exp(lr) if lr < 700 else math.inf
        passed = r_up >= need - SPECTRAL_TOL
        ok &= passed
        checks.append(
            {"claim": what, "required": format(need, ".17g"), "radius_upper": format(r_up, ".17g"), "ok": passed}
        )
    return ConsistencyReport(ok, lr, tuple(checks))
