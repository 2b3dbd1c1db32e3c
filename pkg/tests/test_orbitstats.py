import copy
import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linchaos.constructors import backward_shift_irregular_seed, design_di_forward_weights
from linchaos.operators import backward_shift, finite_matrix, weighted_backward_shift, weighted_forward_shift
from linchaos.orbitstats import (
    DETECTORS,
    Certificate,
    IndexSet,
    Rejection,
    canonical_dumps,
    density,
    dirregular_test,
    distributional_count,
    distributional_function,
    first_mismatch,
    irregular_test,
    liyorke_pair_test,
    powers_of_two,
    rerun,
    verify_certificate,
)
from linchaos.seqspace import SpaceSpec, SparseVector, WeightSequence

from .oracle import dyadic_even_count, orbit_norms

W2 = weighted_backward_shift(WeightSequence.constant(2.0))

# -- index sets and densities ---------------------------------------------------

idx_sets = st.sets(st.integers(0, 300), max_size=80)


@given(idx_sets, st.integers(0, 320))
def test_count_upto_against_brute_force(s, n):
    A = IndexSet.from_indices(s)
    assert A.count_upto(n) == sum(1 for i in s if 1 <= i <= n)
    assert len(A) == len(s) and sorted(A) == sorted(s)


@given(idx_sets, st.integers(300, 400))
def test_complement_partitions_the_range(s, h):
    A = IndexSet.from_indices(s)
    C = A.complement(h)
    assert set(A) | set(C) == set(range(h + 1)) and not set(A) & set(C)


@given(st.lists(st.tuples(st.integers(0, 200), st.integers(1, 30)), max_size=10))
def test_from_runs_merges(runs):
    A = IndexSet.from_runs((a, a + L) for a, L in runs)
    assert set(A) == {i for a, L in runs for i in range(a, a + L)}


@given(idx_sets)
def test_density_bounds(s):
    A = IndexSet.from_indices(s)
    rep = density(A, 300, list(range(1, 301)), warmup=30)
    assert 0 <= rep.ldens_exact <= rep.udens_exact <= 1
    ratios = [Fraction(A.count_upto(n), n) for n in range(30, 301)]
    assert rep.udens_exact == max(ratios) and rep.ldens_exact == min(ratios)


def test_dyadic_density_against_closed_form():
    h = 1 << 20
    A = IndexSet.from_runs([(4**k, 2 * 4**k) for k in range(11)])
    cps = powers_of_two(h)
    rep = density(A, h, cps)
    assert all(A.count_upto(n) == dyadic_even_count(n) for n in cps)
    exact = [Fraction(dyadic_even_count(n), n) for n in cps if n >= h // 10]
    assert rep.udens_exact == max(exact) and rep.ldens_exact == min(exact)


def test_index_set_json_round_trip():
    A = IndexSet.from_runs([(1, 4), (9, 12)], rule={"below": "0"})
    assert IndexSet.from_json(A.to_json()) == A


# -- distributional function --------------------------------------------------------


@given(st.integers(0, 30), st.integers(1, 60), st.floats(0.01, 100))
def test_distributional_count_against_enumeration(j, n, tau):
    x = SparseVector.basis(j)
    ref = orbit_norms({j: 1.0}, lambda a: 2, n - 1)
    assert distributional_count(W2, x, SparseVector(), n, tau) == sum(1 for v in ref if v < tau)


def test_distributional_function_golden():
    assert distributional_function(W2, SparseVector.basis(5), SparseVector(), 10, 1.0) == 0.4


def test_distributional_function_is_strict_at_threshold():
    # ||T^0 e_0|| = 1 is not < 1
    assert distributional_count(W2, SparseVector.basis(0), SparseVector(), 1, 1.0) == 0


# -- detectors ------------------------------------------------------------------


@pytest.fixture(scope="module")
def wbs_seed():
    c = backward_shift_irregular_seed(W2, 4)
    return c, max(c.indices["n"]) + 5


def test_irregular_seed_accepted_and_reverifies(wbs_seed):
    c, h = wbs_seed
    cert = irregular_test(W2, c.vector, h, 1.0, 1.0, 3)
    assert isinstance(cert, Certificate) and cert.claim == "IrregularVector"
    assert verify_certificate(cert).ok
    assert rerun(cert).to_json() == cert.to_json()


def test_certificate_json_round_trip(wbs_seed):
    c, h = wbs_seed
    cert = irregular_test(W2, c.vector, h, 1.0, 1.0, 3)
    again = Certificate.from_json(json.loads(cert.dumps()))
    assert again.dumps() == cert.dumps()
    assert verify_certificate(json.loads(cert.dumps())).ok


def test_tampered_certificate_is_caught(wbs_seed):
    c, h = wbs_seed
    d = irregular_test(W2, c.vector, h, 1.0, 1.0, 3).to_json()
    bad = copy.deepcopy(d)
    bad["params"]["high"] = "1000000"
    v = verify_certificate(bad)
    assert not v.ok and v.mismatch is not None
    bad = copy.deepcopy(d)
    bad["witnesses"]["x"] = SparseVector.basis(3).to_json()
    assert not verify_certificate(bad).ok


def test_basis_vector_is_not_irregular():
    r = irregular_test(W2, SparseVector.basis(3), 100, 1.0, 1.0, 3)
    assert isinstance(r, Rejection) and not r.accepted


def test_isometry_never_irregular():
    T = backward_shift(SpaceSpec.lp(2.0))
    x = SparseVector.from_dict({0: 1.0, 5: 2.0, 40: -1.0})
    assert not irregular_test(T, x, 500, 1.0, 1.0, 2).accepted
    assert not liyorke_pair_test(T, x, SparseVector(), 500, 0.5, 2).accepted
    assert not dirregular_test(T, x, 500, 0.5, 0.9, 2).accepted


def test_contraction_matrix_rejected():
    T = finite_matrix([[0.5, 0.1], [0.0, 0.9]])
    x = SparseVector.from_dict({0: 1.0, 1: 1.0})
    assert not DETECTORS["irregular_test"](T, x, 2000, 1.0, 1.0, 3).accepted
    assert not DETECTORS["liyorke_pair_test"](T, x, SparseVector(), 2000, 0.5, 3).accepted
    assert not DETECTORS["dirregular_test"](T, x, 2000, 0.5, 0.9, 3).accepted
    assert not DETECTORS["scrambled_line_test"](T, x, [1.0, 2.0], 2000, 0.5, 0.9, 3).accepted


def test_designed_forward_weights_distributionally_irregular():
    w = design_di_forward_weights(0.9, 3)
    T = weighted_forward_shift(w)
    res = dirregular_test(T, SparseVector.basis(0), w.P + w.tail.total, 0.5, 0.85, 3)
    assert res.accepted and res.claim == "DistributionallyIrregularVector"
    assert verify_certificate(res).ok


def test_canonical_dumps_is_order_independent():
    a = {"b": [1, {"y": 2, "x": 1}], "a": "s"}
    b = {"a": "s", "b": [1, {"x": 1, "y": 2}]}
    assert canonical_dumps(a) == canonical_dumps(b)
    assert first_mismatch(a, {"a": "t", "b": a["b"]}) == "$.a"
