import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linchaos.constructors import doubling_shift_dcc_inputs
from linchaos.criteria import (
    CriterionRejection,
    SDCCWitness,
    compute_Mv,
    compute_Mw,
    dcc_witness_check,
    decay_evidence,
    lycc_evidence,
    max_product_scan,
    sdcc_witness_search,
    series_summability_test,
    span_samples,
    spectral_consistency_check,
)
from linchaos.errors import PreconditionViolation
from linchaos.operators import backward_shift, finite_matrix, weighted_backward_shift, weighted_forward_shift
from linchaos.orbitstats import irregular_test
from linchaos.seqspace import SpaceSpec, SparseVector, WeightSequence

W2 = weighted_backward_shift(WeightSequence.constant(2.0))
positive = st.floats(0.05, 20.0)


# -- suprema ------------------------------------------------------------------


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=60))
def test_max_product_scan_against_brute_force(xs):
    best, (n, m) = max_product_scan(np.array(xs))
    ref = max(math.fsum(xs[a : b + 1]) for a in range(len(xs)) for b in range(a + 1, len(xs)))
    assert best == pytest.approx(ref, abs=1e-9)
    assert n < m and math.fsum(xs[n : m + 1]) == pytest.approx(best, abs=1e-9)


@given(st.lists(positive, max_size=8), st.floats(0.2, 1.0))
def test_Mv_against_brute_force(prefix, c):
    v = WeightSequence.constant(c, prefix)
    vals = [Fraction(x).limit_denominator(10**12) for x in prefix] + [Fraction(c).limit_denominator(10**12)] * 3
    sup = compute_Mv(v)
    # a constant tail adds nothing beyond its first few entries
    ref = max(float(vals[n]) / float(vals[m]) for n in range(len(vals)) for m in range(n + 1, len(vals)))
    if c < 1 or ref > 1:
        assert sup.is_finite
        assert float(sup.value) == pytest.approx(ref, rel=1e-9)


def test_Mv_of_decaying_weights_is_infinite():
    sup = compute_Mv(WeightSequence.geometric(0.5))
    assert sup.is_infinite
    for k, (n, m, lr) in enumerate(sup.witnesses, start=1):
        assert n < m and lr > k * math.log(3)
        assert lr == pytest.approx((m - n) * math.log(2.0))


def test_Mv_of_constant_is_one():
    sup = compute_Mv(WeightSequence.constant(1.0))
    assert sup.is_finite and sup.value.logmag == 0.0


@given(st.lists(st.floats(0.1, 4.0), min_size=1, max_size=10))
def test_Mw_against_brute_force(prefix):
    w = WeightSequence.constant(0.5, [1.0, *prefix])
    vals = [1.0, *prefix] + [0.5] * 4
    sup = compute_Mw(w)
    ref = max(math.prod(vals[n : m + 1]) for n in range(1, len(vals)) for m in range(n + 1, len(vals)))
    assert sup.is_finite
    assert float(sup.value) == pytest.approx(ref, rel=1e-9)


def test_Mw_of_doubling_weights_is_infinite():
    sup = compute_Mw(WeightSequence.constant(2.0))
    assert sup.is_infinite and len(sup.witnesses) >= 3
    for k, (n, m, lr) in enumerate(sup.witnesses, start=1):
        assert lr > k * math.log(3)


def test_Mw_runs_oscillation():
    # blocks of 2s and 1/2s of growing length: products unbounded
    w = WeightSequence.runs([2.0, 0.5] * 6, [1, 1, 2, 2, 4, 4, 8, 8, 16, 16, 32, 32], 1.0)
    assert compute_Mw(w).is_finite
    assert float(compute_Mw(w).value) == pytest.approx(2.0**32, rel=1e-12)


# -- SDCC / DCC / LYCC -------------------------------------------------------------


def test_sdcc_witness_on_doubling_shift():
    wit = sdcc_witness_search(W2, 1.5, 6)
    assert isinstance(wit, SDCCWitness) and len(wit.xs) == 6
    assert spectral_consistency_check(W2, [wit]).ok


def test_sdcc_rejects_rate_above_radius():
    res = sdcc_witness_search(W2, 2.5, 4)
    assert isinstance(res, CriterionRejection) and not res.accepted


def test_sdcc_requires_r_above_one():
    with pytest.raises(PreconditionViolation):
        sdcc_witness_search(W2, 1.0, 3)


def test_spectral_consistency_catches_impossible_claims():
    wit = sdcc_witness_search(W2, 1.5, 3)
    assert isinstance(wit, SDCCWitness)
    contraction = weighted_forward_shift(WeightSequence.constant(0.5))
    rep = spectral_consistency_check(contraction, [wit])
    assert not rep.ok and rep.checks[0]["ok"] is False


def test_decay_evidence():
    assert decay_evidence(W2, SparseVector.basis(7), 100).decays
    assert decay_evidence(finite_matrix([[0.5]]), SparseVector.basis(0), 200).mode == "tolerance"
    assert not decay_evidence(finite_matrix([[1.0]]), SparseVector.basis(0), 200).decays


def test_dcc_witness_check_fast_growth():
    T, xs, Ns = doubling_shift_dcc_inputs(4)
    rep = dcc_witness_check(T, xs, xs, Ns, 1 << 16)
    assert rep.ok, rep.failures
    for m, c, N in rep.ratios:
        assert c * m >= (m - 1) * N


def test_dcc_witness_check_reports_failures():
    T = weighted_backward_shift(WeightSequence.constant(2.0))
    rep = dcc_witness_check(T, [SparseVector.basis(1)], [SparseVector.basis(1)] * 3, [10, 20, 30], 64)
    assert not rep.ok and any(f.startswith("(b)") for f in rep.failures)


def test_lycc_on_doubling_shift():
    # the span of e_0..e_9 grows by at most 2^9, enough for 2^k, k <= 3
    ev = lycc_evidence(W2, [SparseVector.basis(i) for i in range(10)], 64, K=3)
    assert ev.ok
    assert not lycc_evidence(W2, [SparseVector.basis(i) for i in range(3)], 64, K=3).cond_b


def test_lycc_condition_b_fails_for_isometry():
    T = backward_shift(SpaceSpec.lp(2.0))
    ev = lycc_evidence(T, [SparseVector.basis(i) for i in range(4)], 256)
    assert ev.cond_a and not ev.cond_b and ev.failing == "b"


def test_span_samples_count():
    # nonzero {-1,0,1}-combinations of 4 vectors with <= 3 terms, up to sign
    s = span_samples([SparseVector.basis(i) for i in range(4)], 3)
    assert len(s) == 4 + 6 * 2 + 4 * 4


# -- summability ----------------------------------------------------------------------


def test_summability_of_doubling_powers():
    rep = series_summability_test(W2, range(1, 40), 20)
    assert rep.first.certified and rep.first.total == pytest.approx(1.0, rel=1e-9)
    assert rep.squared.certified and rep.squared.total == pytest.approx(1 / 3, rel=1e-9)


def test_summability_not_certified_for_isometry():
    T = backward_shift(SpaceSpec.lp(2.0))
    assert not series_summability_test(T, range(1, 20), 10).first.certified


def test_consistency_ignores_non_li_yorke_claims():
    cert = irregular_test(W2, SparseVector.basis(2), 20, 1.0, 1.0, 1)
    assert spectral_consistency_check(W2, [] if not cert.accepted else [cert]).ok
