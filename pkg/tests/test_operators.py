import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linchaos.errors import ResourceLimitError, SchemaError
from linchaos.operators import (
    OperatorSpec,
    apply,
    apply_power,
    backward_shift,
    finite_matrix,
    orbit,
    power_norm,
    power_norm_bracket,
    scalar_plus,
    spectral_radius_estimate,
    weighted_backward_shift,
    weighted_forward_shift,
)
from linchaos.seqspace import NEG_INF, SpaceSpec, SparseVector, WeightSequence

from .oracle import binomial_norm, lp_norm, matrix_orbit_norms, orbit_norms, wfs_step

vectors = st.dictionaries(st.integers(0, 30), st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3), min_size=1, max_size=5)
ratios = st.floats(0.3, 1.0)  # r > 1 gives an unbounded shift


def _close(got: float, ref: mpmath.mpf, tol: float = 1e-9) -> bool:
    if ref == 0:
        return got == NEG_INF
    return abs(got - float(mpmath.log(ref))) <= tol * max(1.0, abs(float(mpmath.log(ref))))


@given(vectors, st.floats(0.5, 3.0), st.integers(1, 60))
def test_wbs_constant_orbit_against_enumeration(d, c, N):
    T = weighted_backward_shift(WeightSequence.constant(c))
    rec = orbit(T, SparseVector.from_dict(d), N)
    ref = orbit_norms(d, lambda a: mpmath.mpf(c), N)
    assert all(_close(rec.lognorm_at(n), ref[n]) for n in range(N + 1))


@given(vectors, ratios, st.integers(1, 40))
def test_wbs_geometric_orbit_against_enumeration(d, r, N):
    T = weighted_backward_shift(WeightSequence.geometric(r))
    rec = orbit(T, SparseVector.from_dict(d), N)
    ref = orbit_norms(d, lambda a: mpmath.mpf(r) ** a, N)
    assert all(_close(rec.lognorm_at(n), ref[n]) for n in range(N + 1))


@given(vectors, ratios, st.integers(1, 40))
def test_forward_shift_orbit_against_enumeration(d, r, N):
    T = weighted_forward_shift(WeightSequence.geometric(r))
    rec = orbit(T, SparseVector.from_dict(d), N)
    ref = orbit_norms(d, lambda a: mpmath.mpf(r) ** a, N, step=wfs_step)
    assert all(_close(rec.lognorm_at(n), ref[n]) for n in range(N + 1))


@given(vectors, st.integers(1, 40))
def test_backward_shift_weighted_space_against_enumeration(d, N):
    T = backward_shift(SpaceSpec.lp(2.0, WeightSequence.geometric(0.5)))
    rec = orbit(T, SparseVector.from_dict(d), N)
    norm = lambda x: lp_norm(x, 2.0, lambda i: mpmath.mpf(2) ** -i)  # noqa: E731
    ref = orbit_norms(d, lambda a: mpmath.mpf(1), N, norm=norm)
    assert all(_close(rec.lognorm_at(n), ref[n]) for n in range(N + 1))


@given(vectors, st.integers(1, 30))
def test_closed_form_matches_iteration(d, N):
    x = SparseVector.from_dict(d)
    for T in (
        weighted_backward_shift(WeightSequence.runs([2.0, 0.5], [3, 5], 1.5)),
        weighted_forward_shift(WeightSequence.power_law(-0.5, 2.0, 1.0)),
    ):
        a, b = orbit(T, x, N), orbit(T, x, N, method="iterate")
        for n in range(N + 1):
            assert a.lognorm_at(n) == pytest.approx(b.lognorm_at(n), abs=1e-9) or a.lognorm_at(n) == b.lognorm_at(n)


@given(vectors, st.integers(0, 40))
def test_apply_power_agrees_with_repeated_apply(d, n):
    T = weighted_backward_shift(WeightSequence.geometric(0.9, 1.7))
    x = SparseVector.from_dict(d)
    y = x
    for _ in range(n):
        y = apply(T, y)
    z = apply_power(T, x, n)
    assert list(y.support) == list(z.support)
    for i in y.support:
        assert y.coef(i).isclose(z.coef(i), 1e-10)


def test_existence_operator_orbit_against_binomial_oracle():
    from linchaos.constructors import existence_T

    T = existence_T()
    j = 40
    rec = orbit(T, SparseVector.basis(j), 60)
    w = lambda n: mpmath.mpf(1) if n == 0 else mpmath.mpf(n) ** (mpmath.mpf(-2) / 3)  # noqa: E731
    for i in (0, 1, 5, 17, 40, 60):
        assert _close(rec.lognorm_at(i), binomial_norm(i, j, w), 1e-10)


def test_finite_matrix_orbit_against_mpmath():
    M = [[0.5, 1.0, 0.0], [0.0, 0.9, 2.0], [0.1, 0.0, 0.3]]
    T = finite_matrix(M)
    rec = orbit(T, SparseVector.from_dict({0: 1.0, 2: -1.0}), 50)
    ref = matrix_orbit_norms(M, [1.0, 0.0, -1.0], 50)
    assert all(_close(rec.lognorm_at(n), ref[n], 1e-8) for n in range(51))


def test_orbit_budget_is_enforced():
    T = finite_matrix([[0.5, 0.0], [0.0, 0.5]])
    with pytest.raises(ResourceLimitError):
        orbit(T, SparseVector.basis(0), 10_000, budget=100)


def test_huge_horizon_closed_form():
    T = weighted_backward_shift(WeightSequence.constant(2.0))
    x = SparseVector.basis(10**15)
    rec = orbit(T, x, 10**15 + 5)
    assert rec.lognorm_at(10**15) == pytest.approx(10**15 * math.log(2.0), rel=1e-15)
    assert rec.lognorm_at(10**15 + 1) == NEG_INF


# -- orbit record queries against brute force --------------------------------


@given(vectors, st.integers(5, 80), st.floats(-3, 3))
def test_record_queries_against_brute_force(d, N, thr):
    T = weighted_backward_shift(WeightSequence.runs([2.0, 0.5, 1.0], [4, 4, 4], 1.2))
    rec = orbit(T, SparseVector.from_dict(d), N)
    vals = [rec.lognorm_at(n) for n in range(N + 1)]
    below = [n for n in range(N + 1) if vals[n] < thr]
    above = [n for n in range(N + 1) if vals[n] > thr]
    got_below = [n for a, b in rec.intervals(thr, True, 0, N) for n in range(a, b)]
    got_above = [n for a, b in rec.intervals(thr, False, 0, N) for n in range(a, b)]
    assert got_below == below and got_above == above
    assert rec.first_below(thr) == (below[0] if below else None)
    assert rec.first_above(thr) == (above[0] if above else None)
    n_max, v_max = rec.extreme(0, N + 1, True)
    assert v_max == max(vals) and vals[n_max] == v_max


# -- power norms and spectral radius -----------------------------------------------


@pytest.mark.parametrize(
    "T, r",
    [
        (weighted_backward_shift(WeightSequence.constant(2.0)), 2.0),
        (weighted_forward_shift(WeightSequence.constant(0.5)), 0.5),
        (backward_shift(SpaceSpec.lp(2.0, WeightSequence.geometric(0.5))), math.sqrt(2.0)),
        (backward_shift(SpaceSpec.lp(2.0)), 1.0),
        (backward_shift(SpaceSpec.c0(WeightSequence.geometric(1 / 3))), 3.0),
    ],
)
def test_spectral_radius_closed_forms(T, r):
    est = spectral_radius_estimate(T)
    assert est.lower.logmag <= math.log(r) + 1e-12 and est.upper.logmag >= math.log(r) - 1e-12
    assert est.upper.logmag - est.lower.logmag < 1e-9


def test_spectral_radius_of_matrix_matches_eigenvalues():
    M = [[0.5, 1.0, 0.0], [0.0, 0.9, 2.0], [0.1, 0.0, 0.3]]
    r = max(abs(np.linalg.eigvals(np.array(M))))
    est = spectral_radius_estimate(finite_matrix(M))
    assert float(est.lower) <= r * (1 + 1e-9) and float(est.upper) >= r * (1 - 1e-9)


@given(st.integers(1, 30))
def test_power_norm_of_geometric_wbs(n):
    # ||B_w^n|| = sup_k prod_{i=k-n+1}^{k} r^i is unbounded for r > 1 ...
    T = weighted_backward_shift(WeightSequence.geometric(0.8))
    # ... and attained at k = n - 1 (the earliest window) for r < 1
    ref = sum(i for i in range(1, n + 1)) * math.log(0.8)
    assert power_norm(T, n).logmag == pytest.approx(ref, abs=1e-9)


def test_power_norm_bracket_contains_matrix_norm():
    M = np.array([[0.5, 1.0], [0.0, 0.9]])
    br = power_norm_bracket(finite_matrix(M.tolist()), 7)
    ref = np.linalg.norm(np.linalg.matrix_power(M, 7), 2)
    assert float(br.lower) <= ref * (1 + 1e-9) and float(br.upper) >= ref * (1 - 1e-9)


# -- serialisation --------------------------------------------------------------


@pytest.mark.parametrize(
    "T",
    [
        weighted_backward_shift(WeightSequence.constant(2.0)),
        backward_shift(SpaceSpec.c0(WeightSequence.geometric(0.5))),
        scalar_plus(1.0, weighted_backward_shift(WeightSequence.power_law(-2 / 3, 1.0, -1.0, prefix=(1.0, 1.0)))),
        finite_matrix([[0.5, 0.0], [1.0, 0.25]]),
    ],
)
def test_operator_json_round_trip(T):
    again = OperatorSpec.from_json(T.to_json())
    assert again.to_json() == T.to_json()
    x = SparseVector.from_dict({0: 1.0, 1: -2.0})
    assert orbit(again, x, 20).lognorms.tolist() == orbit(T, x, 20).lognorms.tolist()


@pytest.mark.parametrize(
    "bad",
    [{"kind": "Nope", "params": {}, "space": {"kind": "lp", "p": "2"}}, {"params": {}}, [1, 2]],
)
def test_operator_json_rejects_garbage(bad):
    with pytest.raises(SchemaError):
        OperatorSpec.from_json(bad)
