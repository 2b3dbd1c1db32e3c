import math

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from linchaos.errors import SchemaError
from linchaos.seqspace import (
    NEG_INF,
    ZERO,
    LogReal,
    SpaceSpec,
    SparseVector,
    WeightSequence,
    cancellation,
    from_decimal,
    linear_combination,
    logsumexp,
    norm,
    to_decimal,
    weight_product,
)

from .oracle import c0_norm, lp_norm

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(lambda x: x == 0 or abs(x) > 1e-6)
logs = st.floats(min_value=-700, max_value=700, allow_nan=False)


# -- LogReal ----------------------------------------------------------------


@given(finite, finite)
def test_addition_matches_linear(a, b):
    s = LogReal.of(a) + LogReal.of(b)
    exact = a + b
    if exact == 0 or abs(exact) < 1e-12 * max(abs(a), abs(b), 1e-300):
        return
    assert math.isclose(float(s), exact, rel_tol=1e-9)


@given(finite, finite)
def test_multiplication_matches_linear(a, b):
    assert math.isclose(float(LogReal.of(a) * LogReal.of(b)), a * b, rel_tol=1e-12, abs_tol=0)


@given(logs, logs)
def test_ordering_agrees_with_logs(x, y):
    a, b = LogReal.from_log(x), LogReal.from_log(y)
    assert (a < b) == (x < y)
    assert (-a < -b) == (y < x)


@given(logs, logs)
def test_log_domain_sum_beyond_double_range(x, y):
    # e^{x + 1e5} + e^{y + 1e5} has no double representation
    s = LogReal.from_log(x + 1e5) + LogReal.from_log(y + 1e5)
    ref = mpmath.log(mpmath.e ** mpmath.mpf(x + 1e5) + mpmath.e ** mpmath.mpf(y + 1e5))
    assert abs(s.logmag - float(ref)) <= 1e-10 * abs(float(ref))


def test_exact_cancellation_is_zero():
    a = LogReal.of(3.5)
    assert (a - a) is ZERO or (a - a).sign == 0


def test_cancellation_threshold_is_configurable():
    a = LogReal.from_log(0.0)
    b = LogReal.from_log(math.log1p(-1e-20))
    assert (a - b).sign == 0
    with cancellation(60.0):
        d = a - b
    assert d.sign == 1 and math.isclose(d.logmag, math.log(1e-20), rel_tol=1e-3)


def test_zero_representation_is_canonical():
    assert LogReal.of(0.0) == ZERO
    with pytest.raises(ValueError):
        LogReal(0, 1.0)
    with pytest.raises(ValueError):
        LogReal(1, math.inf)


@given(st.lists(logs, max_size=20))
def test_logsumexp_against_mpmath(xs):
    got = logsumexp(xs)
    if not xs:
        assert got == NEG_INF
        return
    ref = mpmath.log(mpmath.fsum(mpmath.e ** mpmath.mpf(x) for x in xs))
    assert abs(got - float(ref)) <= 1e-12 * max(1.0, abs(float(ref)))


@given(st.floats(allow_nan=False))
def test_decimal_round_trip(x):
    assert from_decimal(to_decimal(x)) == x


# -- SparseVector -------------------------------------------------------------

entries = st.dictionaries(st.integers(0, 200), finite.filter(lambda x: x != 0), max_size=8)


@given(entries)
def test_vector_json_round_trip(d):
    x = SparseVector.from_dict(d)
    assert SparseVector.from_json(x.to_json()) == x


@given(entries, entries)
def test_vector_add_sub_inverse(a, b):
    x, y = SparseVector.from_dict(a), SparseVector.from_dict(b)
    z = (x + y) - y
    for i, c in a.items():
        assume(all(abs(c) > 1e-8 * abs(b.get(i, 0)) for i, c in a.items()))
    assert set(z.support) <= set(x.support) | set(y.support)
    for i, c in a.items():
        assert math.isclose(float(z.coef(i)), c, rel_tol=1e-9)


def test_vector_rejects_bad_json():
    with pytest.raises((SchemaError, ValueError)):
        SparseVector.from_json([["1", 2, "0"]])


def test_basis_and_support():
    e = SparseVector.basis(7)
    assert e.max_index == 7 and list(e.support) == [7] and not e.is_zero
    assert SparseVector.from_dict({}).is_zero


# -- weights and norms ----------------------------------------------------------


@given(st.floats(0.1, 10), st.integers(0, 50), st.integers(0, 50))
def test_weight_product_constant(c, a, n):
    w = WeightSequence.constant(c)
    assert math.isclose(weight_product(w, a, a + n).logmag, (n + 1) * math.log(c), rel_tol=1e-12, abs_tol=1e-12)


@given(st.floats(0.1, 3), st.integers(0, 40), st.integers(0, 40))
def test_weight_product_geometric(r, a, n):
    w = WeightSequence.geometric(r)
    ref = mpmath.log(mpmath.fprod(mpmath.mpf(r) ** i for i in range(a, a + n + 1)))
    assert abs(w.log_range(a, a + n + 1) - float(ref)) <= 1e-9 * max(1, abs(float(ref)))


@given(st.integers(0, 300), st.integers(1, 300))
def test_power_law_range_matches_sum(a, n):
    w = WeightSequence.power_law(-2 / 3, 1.0, 1.0)
    ref = mpmath.fsum(mpmath.log(mpmath.mpf(i + 1) ** (mpmath.mpf(-2) / 3)) for i in range(a, a + n))
    assert abs(w.log_range(a, a + n) - float(ref)) <= 1e-9 * max(1, abs(float(ref)))


def test_weight_json_round_trip():
    for w in (
        WeightSequence.constant(2.0, [1.0, 3.0]),
        WeightSequence.geometric(0.5),
        WeightSequence.power_law(-2 / 3, 1.0, -1.0, prefix=(1.0, 1.0)),
        WeightSequence.runs([2.0, 0.5], [3, 7], 1.0),
    ):
        again = WeightSequence.from_json(w.to_json())
        assert [again.log_at(i) for i in range(40)] == [w.log_at(i) for i in range(40)]


@given(entries, st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_lp_norm_with_weights(d, p):
    x = SparseVector.from_dict(d)
    v = WeightSequence.geometric(0.5)
    got = norm(x, SpaceSpec.lp(p, v))
    ref = lp_norm({i: mpmath.mpf(c) for i, c in d.items()}, p, lambda i: mpmath.mpf(2) ** -i)
    if not d:
        assert got.sign == 0
    else:
        assert math.isclose(got.logmag, float(mpmath.log(ref)), rel_tol=1e-9, abs_tol=1e-9)


@given(entries)
def test_c0_norm(d):
    x = SparseVector.from_dict(d)
    got = norm(x, SpaceSpec.c0(WeightSequence.constant(3.0)))
    ref = c0_norm({i: mpmath.mpf(c) for i, c in d.items()}, lambda i: mpmath.mpf(3))
    if d:
        assert math.isclose(got.logmag, float(mpmath.log(ref)), rel_tol=1e-12, abs_tol=1e-12)


SPACES = [SpaceSpec.lp(1.0), SpaceSpec.lp(2.0, WeightSequence.geometric(0.5)), SpaceSpec.lp(3.0), SpaceSpec.c0(WeightSequence.constant(3.0))]


@given(entries, entries, st.floats(-50, 50).filter(lambda c: c != 0), st.sampled_from(SPACES))
def test_norm_axioms(a, b, c, space):
    x, y = SparseVector.from_dict(a), SparseVector.from_dict(b)
    nx, ny = float(norm(x, space)), float(norm(y, space))
    nsum = float(norm(linear_combination([(1.0, x), (1.0, y)]), space))
    assert nsum <= (nx + ny) * (1 + 1e-12) + 1e-300
    scaled = float(norm(linear_combination([(c, x)]), space))
    assert math.isclose(scaled, abs(c) * nx, rel_tol=1e-12, abs_tol=1e-300)
    assert (nx == 0) == (not a)


def test_linear_combination_beyond_double_range():
    big = SparseVector.basis(0, LogReal.from_log(2e5))
    y = linear_combination([(LogReal.from_log(-1e5), big), (1.0, SparseVector.basis(1))])
    assert math.isclose(y.coef(0).logmag, 1e5)
    assert float(y.coef(1)) == 1.0
