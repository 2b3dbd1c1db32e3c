"""Series plans and verification checks shared by the constructors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

from ..seqspace import NEG_INF, LogReal, SparseVector, from_decimal, linear_combination, logsumexp, to_decimal


def _lin(logv: float) -> float:
    return math.exp(logv) if logv < 700 else math.inf


@dataclass(frozen=True)
class SeriesTerm:
    coef: LogReal
    vector: SparseVector
    source: int  # the index n_k / N_k / i the term comes from

    def to_json(self) -> dict[str, Any]:
        return {
            "coef": [self.coef.sign, to_decimal(self.coef.logmag)],
            "vector": self.vector.to_json(),
            "source": str(self.source),
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> SeriesTerm:
        s, lm = d["coef"]
        return cls(LogReal(int(s), from_decimal(lm)), SparseVector.from_json(d["vector"]), int(d["source"]))


@dataclass(frozen=True)
class SeriesPlan:
    """Truncated series sum_k coef_k vector_k.

    ``log_tail_bound`` bounds the norm of the dropped terms over the index
    range the checks use; ``targets`` names the inequalities the truncated
    sum must satisfy.  ``term_lognorms`` (log ||coef_k vector_k||) must be
    strictly decreasing.
    """

    source: str
    terms: tuple[SeriesTerm, ...]
    term_lognorms: tuple[float, ...]
    log_tail_bound: float
    targets: tuple[str, ...]
    params: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.terms) != len(self.term_lognorms):
            raise ValueError("one log-norm per term")
        if any(b >= a for a, b in zip(self.term_lognorms, self.term_lognorms[1:])):
            raise ValueError("term magnitudes must be strictly decreasing")

    @property
    def truncation(self) -> int:
        return len(self.terms)

    def vector(self) -> SparseVector:
        return linear_combination((t.coef, t.vector) for t in self.terms)

    def to_json(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "truncation": self.truncation,
            "terms": [t.to_json() for t in self.terms],
            "term_lognorms": [to_decimal(x) for x in self.term_lognorms],
            "log_tail_bound": to_decimal(self.log_tail_bound),
            "targets": list(self.targets),
            "params": dict(sorted(self.params.items())),
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> SeriesPlan:
        return cls(
            d["source"],
            tuple(SeriesTerm.from_json(t) for t in d["terms"]),
            tuple(from_decimal(x) for x in d["term_lognorms"]),
            from_decimal(d["log_tail_bound"]),
            tuple(d["targets"]),
            dict(d.get("params", {})),
        )


@dataclass(frozen=True)
class Check:
    """One verified inequality ``value (rel) bound`` with the dropped tail
    charged against it: '<' needs value + tail < bound, '>' needs
    value - tail > bound.  ``log_bound`` overrides log(bound) when the
    bound does not fit a double."""

    name: str
    k: int
    index: int
    log_value: float
    bound: float
    relation: str
    log_tail: float = NEG_INF
    log_bound: Optional[float] = None

    def __post_init__(self) -> None:
        if self.relation not in ("<", ">"):
            raise ValueError(f"bad relation {self.relation!r}")

    @classmethod
    def of(cls, name: str, k: int, index: int, log_value: float, bound: LogReal, relation: str, log_tail: float = NEG_INF) -> Check:
        """Check with a log-domain bound."""
        if bound.sign > 0:
            return cls(name, k, index, log_value, _lin(bound.logmag), relation, log_tail, bound.logmag)
        return cls(name, k, index, log_value, float(bound), relation, log_tail)

    def _log_bound(self) -> float:
        return self.log_bound if self.log_bound is not None else math.log(self.bound)

    @property
    def ok(self) -> bool:
        if self.relation == "<":
            return self.bound > 0 and logsumexp([self.log_value, self.log_tail]) < self._log_bound()
        if self.bound <= 0:
            return self.log_value > self.log_tail
        return self.log_value > logsumexp([self._log_bound(), self.log_tail])

    @property
    def margin(self) -> float:
        """|value - bound| (inf when the value overflows a double)."""
        return abs(_lin(self.log_value) - self.bound)

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "k": self.k,
            "index": str(self.index),
            "log_value": to_decimal(self.log_value),
            "relation": self.relation,
            "bound": format(self.bound, ".17g"),
            "log_tail": to_decimal(self.log_tail),
            **({"log_bound": to_decimal(self.log_bound)} if self.log_bound is not None else {}),
            "ok": self.ok,
        }


@dataclass(frozen=True)
class Construction:
    """Constructor output: the vector, its series plan, the checks and
    (when the constructor runs one) the detector verdict on the vector."""

    vector: SparseVector
    plan: SeriesPlan
    checks: tuple[Check, ...]
    indices: dict[str, tuple[int, ...]] = field(default_factory=dict)
    notes: dict[str, Any] = field(default_factory=dict)
    verdict: Optional[Any] = None

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks) and (self.verdict is None or self.verdict.accepted)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def tail_ratio(self) -> float:
        """Dropped-tail bound over the smallest check margin."""
        margins = [c.margin for c in self.checks]
        if not margins:
            return 0.0
        m = min(margins)
        return math.inf if m == 0 else _lin(self.plan.log_tail_bound) / m

    def to_json(self) -> dict[str, Any]:
        return {
            "vector": self.vector.to_json(),
            "plan": self.plan.to_json(),
            "checks": [c.to_json() for c in self.checks],
            "indices": {k: [str(i) for i in v] for k, v in sorted(self.indices.items())},
            "ok": self.ok,
            "notes": self.notes,
            **({"verdict": self.verdict.to_json()} if self.verdict is not None else {}),
        }
