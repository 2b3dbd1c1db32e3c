"""Signed real numbers stored as (sign, natural-log magnitude).

Orbit norms in the constructions of this package range over e^{+-1e5} and
beyond, so every coefficient, weight product and norm is carried in the log
domain.  Addition is a signed log-sum-exp; a difference whose magnitude falls
more than ``cancellation_threshold()`` nats below the larger operand is
rounded to an exact zero.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

import numpy as np

NEG_INF = float("-inf")
LOG2 = math.log(2.0)

DEFAULT_CANCELLATION = 40.0
_cancellation: contextvars.ContextVar[float] = contextvars.ContextVar(
    "linchaos_cancellation", default=DEFAULT_CANCELLATION
)


def cancellation_threshold() -> float:
    return _cancellation.get()


@contextlib.contextmanager
def cancellation(nats: float) -> Iterator[None]:
    """Temporarily change the cancellation threshold (context-local)."""
    if not nats > 0:
        raise ValueError("cancellation threshold must be positive")
    token = _cancellation.set(float(nats))
    try:
        yield
    finally:
        _cancellation.reset(token)


Number = Union[int, float, "LogReal"]


@dataclass(frozen=True, slots=True)
class LogReal:
    sign: int
    logmag: float

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if math.isnan(self.logmag) or self.logmag == math.inf:
            raise ValueError(f"invalid log-magnitude {self.logmag!r}")
        if (self.sign == 0) != (self.logmag == NEG_INF):
            raise ValueError("sign is 0 exactly when logmag is -inf")

    # -- construction -------------------------------------------------
    @classmethod
    def of(cls, value: Number) -> LogReal:
        if isinstance(value, LogReal):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            if value == 0:
                return ZERO
            # math.log is exact enough for huge ints, float(value) is not
            return cls(1 if value > 0 else -1, math.log(abs(value)))
        x = float(value)
        if math.isnan(x) or math.isinf(x):
            raise ValueError(f"cannot represent {x!r} as LogReal")
        if x == 0.0:
            return ZERO
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, logmag: float, sign: int = 1) -> LogReal:
        if logmag == NEG_INF or sign == 0:
            return ZERO
        return cls(sign, float(logmag))

    # -- predicates / conversion --------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __bool__(self) -> bool:
        return self.sign != 0

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.logmag)
        except OverflowError:
            return self.sign * math.inf

    def log(self) -> float:
        """Natural log of a non-negative value (-inf for zero)."""
        if self.sign < 0:
            raise ValueError("log of a negative LogReal")
        return self.logmag

    # -- arithmetic ---------------------------------------------------
    def __neg__(self) -> LogReal:
        return self if self.sign == 0 else LogReal(-self.sign, self.logmag)

    def __abs__(self) -> LogReal:
        return self if self.sign >= 0 else LogReal(1, self.logmag)

    def __mul__(self, other: Number) -> LogReal:
        o = LogReal.of(other)
        if self.sign == 0 or o.sign == 0:
            return ZERO
        return LogReal(self.sign * o.sign, self.logmag + o.logmag)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> LogReal:
        o = LogReal.of(other)
        if o.sign == 0:
            raise ZeroDivisionError("LogReal division by zero")
        if self.sign == 0:
            return ZERO
        return LogReal(self.sign * o.sign, self.logmag - o.logmag)

    def __rtruediv__(self, other: Number) -> LogReal:
        return LogReal.of(other) / self

    def __pow__(self, exponent: float) -> LogReal:
        if self.sign < 0:
            raise ValueError("only non-negative LogReals can be raised to real powers")
        if self.sign == 0:
            if exponent <= 0:
                raise ZeroDivisionError("0 to a non-positive power")
            return ZERO
        return LogReal(1, self.logmag * exponent)

    def __add__(self, other: Number) -> LogReal:
        return signed_logaddexp(self, LogReal.of(other))

    __radd__ = __add__

    def __sub__(self, other: Number) -> LogReal:
        return signed_logaddexp(self, -LogReal.of(other))

    def __rsub__(self, other: Number) -> LogReal:
        return signed_logaddexp(LogReal.of(other), -self)

    # -- ordering by value --------------------------------------------
    def _key(self) -> tuple[int, float]:
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.logmag)

    def __lt__(self, other: Number) -> bool:
        return self._key() < LogReal.of(other)._key()

    def __le__(self, other: Number) -> bool:
        return self._key() <= LogReal.of(other)._key()

    def __gt__(self, other: Number) -> bool:
        return self._key() > LogReal.of(other)._key()

    def __ge__(self, other: Number) -> bool:
        return self._key() >= LogReal.of(other)._key()

    def isclose(self, other: Number, rel_log: float = 1e-12) -> bool:
        """Same sign and log-magnitudes within ``rel_log`` (relative, floor 1 nat)."""
        o = LogReal.of(other)
        if self.sign != o.sign:
            return False
        if self.sign == 0:
            return True
        scale = max(1.0, abs(self.logmag), abs(o.logmag))
        return abs(self.logmag - o.logmag) <= rel_log * scale

    def __repr__(self) -> str:
        if self.sign == 0:
            return "LogReal(0)"
        s = "-" if self.sign < 0 else ""
        return f"LogReal({s}exp({self.logmag!r}))"


ZERO = LogReal(0, NEG_INF)
ONE = LogReal(1, 0.0)


def signed_logaddexp(a: LogReal, b: LogReal) -> LogReal:
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    hi, lo = (a, b) if a.logmag >= b.logmag else (b, a)
    d = lo.logmag - hi.logmag
    if hi.sign == lo.sign:
        return LogReal(hi.sign, hi.logmag + math.log1p(math.exp(d)))
    if d == 0.0:
        return ZERO
    mag = hi.logmag + math.log(-math.expm1(d))
    if mag < hi.logmag - cancellation_threshold():
        return ZERO
    return LogReal(hi.sign, mag)


def logsumexp(logs: Iterable[float]) -> float:
    """log(sum(exp(x))) of plain float logs; empty or all -inf gives -inf."""
    xs = [x for x in logs if x != NEG_INF]
    if not xs:
        return NEG_INF
    m = max(xs)
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


def logsumexp_rows(a: np.ndarray, axis: int = 0) -> np.ndarray:
    """Vectorised log-sum-exp tolerant of all -inf slices."""
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    finite = np.isfinite(m)
    safe = np.where(finite, m, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sum(np.exp(a - safe), axis=axis, keepdims=True)
        out = np.where(finite, safe + np.log(s), -np.inf)
    return np.squeeze(out, axis=axis)


def to_decimal(x: float) -> str:
    """17 significant digits; round-trips every double."""
    if x == NEG_INF:
        return "-inf"
    if x == math.inf:
        return "inf"
    return format(x, ".17g")


def from_decimal(s: str) -> float:
    return float(s)
