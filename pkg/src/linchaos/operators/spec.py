"""Symbolic operator specifications."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Optional

import numpy as np

from ..errors import PreconditionViolation, SchemaError
from ..seqspace import LogReal, SpaceSpec, WeightSequence, from_decimal, to_decimal

SHIFT_KINDS = ("BackwardShift", "WeightedBackwardShift", "WeightedForwardShift")
KINDS = SHIFT_KINDS + ("ScalarPlus", "FiniteMatrix")


@dataclass(frozen=True)
class OperatorSpec:
    kind: str
    space: SpaceSpec
    w: Optional[WeightSequence] = None
    lam: Optional[LogReal] = None
    inner: Optional["OperatorSpec"] = None
    matrix: Optional[tuple[tuple[float, ...], ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind in ("WeightedBackwardShift", "WeightedForwardShift") and self.w is None:
            raise ValueError(f"{self.kind} needs weights")
        if self.kind == "ScalarPlus" and (self.lam is None or self.inner is None):
            raise ValueError("ScalarPlus needs lam and inner")
        if self.kind == "FiniteMatrix":
            if self.matrix is None or not self.matrix:
                raise ValueError("FiniteMatrix needs a non-empty square matrix")
            d = len(self.matrix)
            if any(len(r) != d for r in self.matrix):
                raise ValueError("FiniteMatrix must be square")
            if any(not math.isfinite(a) for r in self.matrix for a in r):
                raise ValueError("FiniteMatrix entries must be finite")
        if self.kind in SHIFT_KINDS:
            b = shift_log_norm_bound(self)
            if not math.isfinite(b):
                raise PreconditionViolation(f"{self.kind} is not bounded on this space (sup of step factors is infinite)")

    # -- helpers ---------------------------------------------------------
    @property
    def is_shift(self) -> bool:
        return self.kind in SHIFT_KINDS

    @property
    def direction(self) -> int:
        """-1 for backward shifts, +1 for forward shifts."""
        if self.kind == "WeightedForwardShift":
            return 1
        if self.kind in SHIFT_KINDS:
            return -1
        raise ValueError(f"{self.kind} is not a shift")

    @property
    def dim(self) -> int:
        if self.kind == "FiniteMatrix":
            assert self.matrix is not None
            return len(self.matrix)
        if self.kind == "ScalarPlus":
            assert self.inner is not None
            return self.inner.dim
        return -1  # infinite

    def step_log(self, pos: int) -> float:
        """log of the coefficient factor picked up by an entry leaving ``pos``."""
        if self.kind == "BackwardShift":
            return 0.0
        assert self.w is not None
        return self.w.log_at(pos)

    def coef_log(self, a: int, n: int) -> float:
        """Total log factor on the entry starting at index a after n steps."""
        if n == 0 or self.kind == "BackwardShift":
            return 0.0
        assert self.w is not None
        if self.kind == "WeightedBackwardShift":
            return self.w.log_range(a - n + 1, a + 1)
        return self.w.log_range(a, a + n)

    def alive(self, a: int, n: int) -> bool:
        return self.direction > 0 or n <= a

    def np_matrix(self) -> np.ndarray:
        if self.kind == "FiniteMatrix":
            return np.array(self.matrix, dtype=float)
        if self.kind == "ScalarPlus" and self.inner is not None and self.inner.kind == "FiniteMatrix":
            assert self.lam is not None
            return float(self.lam) * np.eye(self.inner.dim) + self.inner.np_matrix()
        raise ValueError(f"{self.kind} has no finite matrix")

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict[str, Any]:
        params: dict[str, Any] = {}
        if self.w is not None:
            params["w"] = self.w.to_json()
        if self.lam is not None:
            params["lam"] = [self.lam.sign, to_decimal(self.lam.logmag)]
        if self.inner is not None:
            params["inner"] = self.inner.to_json()
        if self.matrix is not None:
            params["matrix"] = [[to_decimal(a) for a in r] for r in self.matrix]
        return {"kind": self.kind, "params": params, "space": self.space.to_json()}

    @classmethod
    def from_json(cls, d: Mapping[str, Any]) -> OperatorSpec:
        try:
            kind = d["kind"]
            params = d.get("params", {})
            space = SpaceSpec.from_json(d["space"]) if "space" in d else SpaceSpec.lp(2.0)
            w = WeightSequence.from_json(params["w"]) if "w" in params else None
            lam = None
            if "lam" in params:
                lv = params["lam"]
                if isinstance(lv, (list, tuple)):
                    lam = LogReal.from_log(from_decimal(lv[1]), int(lv[0]))
                else:
                    lam = LogReal.of(float(lv))
            inner = cls.from_json(params["inner"]) if "inner" in params else None
            matrix = None
            if "matrix" in params:
                matrix = tuple(tuple(float(a) for a in r) for r in params["matrix"])
            if kind not in KINDS:
                raise SchemaError(f"unknown operator kind {kind!r}")
            return cls(kind, space, w=w, lam=lam, inner=inner, matrix=matrix)
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad operator: {exc}") from exc


def shift_log_norm_bound(T: OperatorSpec) -> float:
    """log of sup over positions of the one-step norm factor; finite iff bounded."""
    e = T.space.v_exponent
    v = T.space.v
    wsup = 0.0 if T.kind == "BackwardShift" else T.w.log_sup()  # type: ignore[union-attr]
    if T.direction < 0:
        vr = v.log_ratio_sup()  # sup log v_i/v_{i+1}
    else:
        inv = WeightSequence(tuple(-x for x in v.prefix), _negated_tail(v))
        vr = inv.log_ratio_sup()  # sup log v_{i+1}/v_i
    return wsup + e * vr


def _negated_tail(v: WeightSequence):
    from ..seqspace import BlockRunLengthTail, ConstantTail, GeometricTail, PowerLawTail, RunsTail

    t = v.tail
    if isinstance(t, ConstantTail):
        return ConstantTail(-t.log_c)
    if isinstance(t, GeometricTail):
        return GeometricTail(-t.log_ratio, -t.log_scale)
    if isinstance(t, PowerLawTail):
        return PowerLawTail(-t.exponent, -t.log_scale, t.offset, t.start)
    if isinstance(t, BlockRunLengthTail):
        return BlockRunLengthTail(tuple(-x for x in t.log_values), t.base, t.slope)
    if isinstance(t, RunsTail):
        return RunsTail(tuple(-x for x in t.log_values), t.lengths, -t.log_final)
    raise TypeError(type(t))


# -- factories -----------------------------------------------------------------


def backward_shift(space: SpaceSpec) -> OperatorSpec:
    return OperatorSpec("BackwardShift", space)


def weighted_backward_shift(w: WeightSequence, space: Optional[SpaceSpec] = None) -> OperatorSpec:
    return OperatorSpec("WeightedBackwardShift", space or SpaceSpec.lp(2.0), w=w)


def weighted_forward_shift(w: WeightSequence, space: Optional[SpaceSpec] = None) -> OperatorSpec:
    return OperatorSpec("WeightedForwardShift", space or SpaceSpec.lp(2.0), w=w)


def scalar_plus(lam: float | LogReal, inner: OperatorSpec) -> OperatorSpec:
    return OperatorSpec("ScalarPlus", inner.space, lam=LogReal.of(lam), inner=inner)


def finite_matrix(rows, space: Optional[SpaceSpec] = None) -> OperatorSpec:
    m = tuple(tuple(float(a) for a in r) for r in rows)
    return OperatorSpec("FiniteMatrix", space or SpaceSpec.lp(2.0), matrix=m)
