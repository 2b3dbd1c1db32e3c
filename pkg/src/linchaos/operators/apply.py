"""Exact action of operators on sparse vectors."""

from __future__ import annotations

import math

from ..errors import PreconditionViolation
from ..seqspace import LogReal, SparseVector, linear_combination
from .spec import OperatorSpec


def _check_matrix_support(T: OperatorSpec, x: SparseVector) -> None:
    d = T.dim
    if x.max_index >= d:
        raise PreconditionViolation(
            f"support index {x.max_index} outside the {d}-dimensional domain", index=x.max_index, dim=d
        )


def apply(T: OperatorSpec, x: SparseVector) -> SparseVector:
    """T x, exactly in log domain."""
    if T.is_shift:
        return shift_power(T, x, 1)
    if T.kind == "ScalarPlus":
        assert T.inner is not None and T.lam is not None
        return linear_combination([(T.lam, x), (1, apply(T.inner, x))])
    # FiniteMatrix
    _check_matrix_support(T, x)
    assert T.matrix is not None
    out = {}
    for r, row in enumerate(T.matrix):
        terms = [(row[c], SparseVector.basis(0, coef)) for c, coef in x if row[c] != 0.0]
        val = linear_combination(terms)
        if not val.is_zero:
            out[r] = val.coefs[0]
    return SparseVector.from_dict(out)


def shift_power(T: OperatorSpec, x: SparseVector, n: int) -> SparseVector:
    """T^n x for shift kinds in closed form (each entry moves n places)."""
    if n < 0:
        raise ValueError("negative power")
    d = T.direction
    idx, cs = [], []
    for a, c in x:
        if not T.alive(a, n):
            continue
        idx.append(a + d * n)
        cs.append(c * LogReal.from_log(T.coef_log(a, n)))
    # the shift is monotone on indices, so order is preserved
    return SparseVector(tuple(idx), tuple(cs))


def log_binom(n: int, k: int) -> float:
    if n < 1000:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def apply_power(T: OperatorSpec, x: SparseVector, n: int) -> SparseVector:
    """T^n x.  Shifts: closed form.  lambda I + S: binomial expansion
    sum_k C(n,k) lambda^(n-k) S^k x.  FiniteMatrix: repeated application."""
    if n < 0:
        raise ValueError("negative power")
    if T.is_shift:
        return shift_power(T, x, n)
    if T.kind == "ScalarPlus":
        assert T.inner is not None and T.lam is not None
        lam, S = T.lam, T.inner
        terms = []
        cur = x
        for k in range(n + 1):
            if cur.is_zero:
                break
            if lam.sign == 0 and k < n:
                cur = apply(S, cur)
                continue
            coef = LogReal.from_log(log_binom(n, k)) * _lam_pow(lam, n - k)
            terms.append((coef, cur))
            if k < n:
                cur = apply(S, cur)
        return linear_combination(terms)
    y = x
    for _ in range(n):
        y = apply(T, y)
    return y


def _lam_pow(lam: LogReal, k: int) -> LogReal:
    if k == 0:
        return LogReal(1, 0.0)
    if lam.sign == 0:
        return LogReal.of(0.0)
    sign = 1 if lam.sign > 0 or k % 2 == 0 else -1
    return LogReal(sign, lam.logmag * k)
