"""Finitely supported vectors, the spaces l^p(v) / c_0(v), and their norms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping, Union

from ..errors import SchemaError
from .logreal import NEG_INF, ONE, ZERO, LogReal, from_decimal, logsumexp, signed_logaddexp, to_decimal
from .weights import WeightSequence

Scalar = Union[int, float, LogReal]


@dataclass(frozen=True)
class SparseVector:
    """Immutable finitely supported sequence; indices sorted, no zero entries."""

    indices: tuple[int, ...] = ()
    coefs: tuple[LogReal, ...] = ()

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.coefs):
            raise ValueError("indices and coefficients differ in length")
        prev = -1
        for i, c in zip(self.indices, self.coefs):
            if not isinstance(i, int) or i < 0:
                raise ValueError(f"index must be a non-negative int, got {i!r}")
            if i <= prev:
                raise ValueError("indices must be strictly increasing")
            if c.sign == 0:
                raise ValueError("zero coefficients are not stored")
            prev = i

    # -- construction ----------------------------------------------------
    @classmethod
    def zero(cls) -> SparseVector:
        return cls()

    @classmethod
    def basis(cls, i: int, coef: Scalar = 1) -> SparseVector:
        c = LogReal.of(coef)
        if c.sign == 0:
            return cls()
        return cls((int(i),), (c,))

    @classmethod
    def from_dict(cls, entries: Mapping[int, Scalar]) -> SparseVector:
        items = sorted((int(i), LogReal.of(c)) for i, c in entries.items())
        items = [(i, c) for i, c in items if c.sign != 0]
        return cls(tuple(i for i, _ in items), tuple(c for _, c in items))

    @classmethod
    def from_values(cls, values: Iterable[float]) -> SparseVector:
        return cls.from_dict({i: v for i, v in enumerate(values)})

    # -- access ----------------------------------------------------------
    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[tuple[int, LogReal]]:
        return iter(zip(self.indices, self.coefs))

    def items(self) -> Iterator[tuple[int, LogReal]]:
        return iter(self)

    @property
    def support(self) -> tuple[int, ...]:
        return self.indices

    @property
    def max_index(self) -> int:
        """Largest support index; -1 for the zero vector."""
        return self.indices[-1] if self.indices else -1

    @property
    def is_zero(self) -> bool:
        return not self.indices

    def coef(self, i: int) -> LogReal:
        lo, hi = 0, len(self.indices)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.indices[mid] < i:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.indices) and self.indices[lo] == i:
            return self.coefs[lo]
        return ZERO

    def to_floats(self, dim: int) -> list[float]:
        out = [0.0] * dim
        for i, c in self:
            if i >= dim:
                raise IndexError(f"support index {i} outside dimension {dim}")
            out[i] = float(c)
        return out

    # -- arithmetic --------------------------------------------------------
    def scale(self, alpha: Scalar) -> SparseVector:
        a = LogReal.of(alpha)
        if a.sign == 0:
            return SparseVector()
        return SparseVector(self.indices, tuple(c * a for c in self.coefs))

    def __neg__(self) -> SparseVector:
        return SparseVector(self.indices, tuple(-c for c in self.coefs))

    def __add__(self, other: SparseVector) -> SparseVector:
        return axpy(ONE, other, self)

    def __sub__(self, other: SparseVector) -> SparseVector:
        return axpy(LogReal(-1, 0.0), other, self)

    def __mul__(self, alpha: Scalar) -> SparseVector:
        return self.scale(alpha)

    __rmul__ = __mul__

    # -- serialization -------------------------------------------------------
    def to_json(self) -> list[list[Any]]:
        return [[str(i), c.sign, to_decimal(c.logmag)] for i, c in self]

    @classmethod
    def from_json(cls, data: Any) -> SparseVector:
        try:
            ent = {int(i): LogReal.from_log(from_decimal(m), int(s)) for i, s, m in data}
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad sparse vector: {exc}") from exc
        return cls.from_dict(ent)

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {float(c):.6g}" for i, c in list(self)[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"SparseVector({{{body}{more}}})"


def axpy(alpha: Scalar, x: SparseVector, y: SparseVector) -> SparseVector:
    """alpha*x + y; entries cancelling below sign resolution are dropped."""
    a = LogReal.of(alpha)
    if a.sign == 0 or x.is_zero:
        return y
    out: dict[int, LogReal] = dict(zip(y.indices, y.coefs))
    for i, c in x:
        out[i] = signed_logaddexp(out.get(i, ZERO), c * a)
    return SparseVector.from_dict(out)


def linear_combination(terms: Iterable[tuple[Scalar, SparseVector]]) -> SparseVector:
    acc: dict[int, list[LogReal]] = {}
    for a, x in terms:
        al = LogReal.of(a)
        if al.sign == 0:
            continue
        for i, c in x:
            acc.setdefault(i, []).append(c * al)
    out = {}
    for i, parts in acc.items():
        pos = logsumexp(p.logmag for p in parts if p.sign > 0)
        neg = logsumexp(p.logmag for p in parts if p.sign < 0)
        out[i] = signed_logaddexp(LogReal.from_log(pos), LogReal.from_log(neg, -1))
    return SparseVector.from_dict(out)


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceSpec:
    """l^p(v) (kind 'lp') or c_0(v) (kind 'c0')."""

    kind: str
    v: WeightSequence
    p: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in ("lp", "c0"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "lp":
            if not (math.isfinite(self.p) and self.p >= 1):
                raise ValueError("p must be a finite real >= 1")
        else:
            object.__setattr__(self, "p", math.inf)

    @classmethod
    def lp(cls, p: float = 2.0, v: WeightSequence | None = None) -> SpaceSpec:
        return cls("lp", v if v is not None else WeightSequence.constant(1.0), float(p))

    @classmethod
    def c0(cls, v: WeightSequence | None = None) -> SpaceSpec:
        return cls("c0", v if v is not None else WeightSequence.constant(1.0))

    @property
    def v_exponent(self) -> float:
        """Exponent e with ||e_i|| = v_i**e: 1/p on l^p(v), 1 on c_0(v)."""
        return 1.0 / self.p if self.kind == "lp" else 1.0

    def basis_lognorm(self, i: int) -> float:
        return self.v_exponent * self.v.log_at(i)

    def combine(self, lognorms: Iterable[float]) -> float:
        """Log-norm of a vector whose per-coordinate contributions
        v_i**e |x_i| have the given logs."""
        vals = list(lognorms)
        if not vals:
            return NEG_INF
        if self.kind == "c0":
            return max(vals)
        p = self.p
        return logsumexp(p * x for x in vals) / p

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "v": self.v.to_json()}
        if self.kind == "lp":
            d["p"] = to_decimal(self.p)
        return d

    @classmethod
    def from_json(cls, d: Mapping[str, Any]) -> SpaceSpec:
        try:
            kind = d["kind"]
            v = WeightSequence.from_json(d["v"]) if "v" in d else WeightSequence.constant(1.0)
            if kind == "lp":
                return cls("lp", v, float(d.get("p", 2.0)))
            if kind == "c0":
                return cls("c0", v)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad space: {exc}") from exc
        raise SchemaError(f"unknown space kind {kind!r}")


def norm(x: SparseVector, space: SpaceSpec) -> LogReal:
    if x.is_zero:
        return ZERO
    e = space.v_exponent
    return LogReal.from_log(space.combine(c.logmag + e * space.v.log_at(i) for i, c in x))


def weight_at(s: WeightSequence, i: int) -> LogReal:
    return s[i]


def weight_product(s: WeightSequence, a: int, b: int) -> LogReal:
    """prod_{k=a}^{b} s_k (inclusive)."""
    if a > b:
        raise ValueError(f"weight_product needs a <= b, got a={a}, b={b}")
    return LogReal.from_log(s.log_range(a, b + 1))
