"""Index sets of natural numbers and finite-horizon density estimates."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, Optional, Sequence


@dataclass(frozen=True)
class IndexSet:
    """Finite union of half-open runs [a, b) of non-negative integers.

    ``rule`` optionally records how the set was produced (e.g. a threshold
    comparison on an orbit) so certificates can say what they contain.
    """

    runs: tuple[tuple[int, int], ...] = ()
    rule: Optional[dict[str, Any]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        prev = -1
        for a, b in self.runs:
            if not (0 <= a < b) or a <= prev:
                raise ValueError(f"runs must be disjoint, sorted, non-empty: {self.runs[:5]}...")
            prev = b
        cum = [0]
        for a, b in self.runs:
            cum.append(cum[-1] + (b - a))
        object.__setattr__(self, "_cum", tuple(cum))
        object.__setattr__(self, "_starts", tuple(a for a, _ in self.runs))

    @classmethod
    def from_indices(cls, idx: Iterable[int], rule: Optional[dict[str, Any]] = None) -> IndexSet:
        runs: list[tuple[int, int]] = []
        for i in sorted(set(int(i) for i in idx)):
            if i < 0:
                raise ValueError("indices must be non-negative")
            if runs and runs[-1][1] == i:
                runs[-1] = (runs[-1][0], i + 1)
            else:
                runs.append((i, i + 1))
        return cls(tuple(runs), rule)

    @classmethod
    def from_runs(cls, runs: Iterable[tuple[int, int]], rule: Optional[dict[str, Any]] = None) -> IndexSet:
        merged: list[tuple[int, int]] = []
        for a, b in sorted((int(a), int(b)) for a, b in runs if b > a):
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(b, merged[-1][1]))
            else:
                merged.append((a, b))
        return cls(tuple(merged), rule)

    def __contains__(self, n: int) -> bool:
        k = bisect.bisect_right(self._starts, n) - 1  # type: ignore[attr-defined]
        return k >= 0 and n < self.runs[k][1]

    def __len__(self) -> int:
        return self._cum[-1]  # type: ignore[attr-defined]

    def __iter__(self) -> Iterator[int]:
        for a, b in self.runs:
            yield from range(a, b)

    def count_upto(self, n: int) -> int:
        """card(A intersected with [1, n])."""
        return self._count_le(n) - self._count_le(0)

    def _count_le(self, n: int) -> int:
        k = bisect.bisect_right(self._starts, n) - 1  # type: ignore[attr-defined]
        if k < 0:
            return 0
        a, b = self.runs[k]
        return self._cum[k] + min(n + 1, b) - a  # type: ignore[attr-defined]

    def complement(self, horizon: int) -> IndexSet:
        """[0, horizon] minus this set."""
        out = []
        prev = 0
        for a, b in self.runs:
            if a > horizon:
                break
            if a > prev:
                out.append((prev, a))
            prev = b
        if prev <= horizon:
            out.append((prev, horizon + 1))
        return IndexSet(tuple(out))

    def clip(self, lo: int, hi: int) -> IndexSet:
        """Intersection with [lo, hi]."""
        out = [(max(a, lo), min(b, hi + 1)) for a, b in self.runs if b > lo and a <= hi]
        return IndexSet(tuple((a, b) for a, b in out if b > a), self.rule)

    def run_ends(self) -> list[int]:
        """Last element of every run: where count(n)/n has its local maxima."""
        return [b - 1 for _, b in self.runs]

    def run_starts(self) -> list[int]:
        return [a for a, _ in self.runs]

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"runs": [[str(a), str(b)] for a, b in self.runs]}
        if self.rule is not None:
            d["rule"] = self.rule
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> IndexSet:
        return cls(tuple((int(a), int(b)) for a, b in d["runs"]), d.get("rule"))


@dataclass(frozen=True)
class DensityReport:
    """Finite-horizon estimates of upper and lower density.

    These are estimates of limsup/liminf of card(A & [1,n])/n taken over the
    listed checkpoints only; they are not limits.
    """

    horizon: int
    checkpoints: tuple[int, ...]
    counts: tuple[int, ...]
    warmup: int
    udens_exact: Fraction
    ldens_exact: Fraction
    label: str = "finite-horizon estimate"

    @property
    def udens_estimate(self) -> float:
        return float(self.udens_exact)

    @property
    def ldens_estimate(self) -> float:
        return float(self.ldens_exact)

    @property
    def argmax(self) -> int:
        for n, c in zip(self.checkpoints, self.counts):
            if n >= self.warmup and Fraction(c, n) == self.udens_exact:
                return n
        return -1

    def to_json(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "horizon": str(self.horizon),
            "warmup": str(self.warmup),
            "udens": f"{self.udens_exact.numerator}/{self.udens_exact.denominator}",
            "ldens": f"{self.ldens_exact.numerator}/{self.ldens_exact.denominator}",
            "udens_decimal": format(float(self.udens_exact), ".17g"),
            "ldens_decimal": format(float(self.ldens_exact), ".17g"),
            "argmax": str(self.argmax),
            "n_checkpoints": len(self.checkpoints),
        }


def density(
    A: IndexSet,
    horizon: int,
    checkpoints: Sequence[int],
    warmup: Optional[int] = None,
) -> DensityReport:
    """Density estimates of A over the given checkpoints.

    Only checkpoints n >= warmup (default horizon // 10, at least 1) enter
    either estimate; early checkpoints are dominated by transients (n = 1
    alone would report density 1 for any A containing 1).
    """
    if not checkpoints:
        raise ValueError("density needs at least one checkpoint")
    cps = sorted(set(int(n) for n in checkpoints))
    if cps[0] < 1:
        raise ValueError("checkpoints must be >= 1")
    if cps[-1] > horizon:
        raise ValueError(f"checkpoint {cps[-1]} beyond horizon {horizon}")
    if warmup is None:
        warmup = max(1, horizon // 10)
    counts = [A.count_upto(n) for n in cps]
    used = [(n, c) for n, c in zip(cps, counts) if n >= warmup]
    if not used:
        raise ValueError(f"no checkpoint at or beyond the warm-up {warmup}")
    ratios = [Fraction(c, n) for n, c in used]
    return DensityReport(horizon, tuple(cps), tuple(counts), warmup, max(ratios), min(ratios))


def powers_of_two(horizon: int) -> list[int]:
    out = []
    n = 1
    while n <= horizon:
        out.append(n)
        n *= 2
    return out
