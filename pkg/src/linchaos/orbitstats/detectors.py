"""Finite-horizon chaos detectors over orbit records.

liminf = 0 and limsup = infinity cannot be decided at a finite horizon, so
every detector asks for geometric envelopes: the k-th low must fall below
threshold * 2^-k and the k-th high must exceed threshold * 2^k, for k = 1..K.
Evidence therefore strengthens with K rather than resting on one plateau.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

from ..errors import PreconditionViolation
from ..operators import DEFAULT_BUDGET, OperatorSpec, OrbitRecord, orbit
from ..seqspace import LOG2, SparseVector, to_decimal
from .certificate import Certificate, Rejection
from .density import IndexSet, density

K_CAP = 64
DETECTOR_WARMUP = 10


def _dec(x: float) -> str:
    return format(float(x), ".17g")


def _log(x: float, what: str) -> float:
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise PreconditionViolation(f"{what} must be a positive finite real, got {x}")
    return math.log(x)


# ---------------------------------------------------------------------------
# distributional function
# ---------------------------------------------------------------------------


def distributional_count(T: OperatorSpec, x: SparseVector, y: SparseVector, n: int, tau: float) -> int:
    """card{0 <= i <= n-1 : ||T^i x - T^i y|| < tau}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lt = _log(tau, "tau")
    rec = orbit(T, x - y, n - 1)
    return sum(b - a for a, b in rec.intervals(lt, True, 0, n - 1))


def distributional_function(T: OperatorSpec, x: SparseVector, y: SparseVector, n: int, tau: float) -> float:
    """F^n_{xy}(tau) = (1/n) card{0 <= i <= n-1 : ||T^i x - T^i y|| < tau}.

    The inequality is strict: distances equal to tau do not count.
    """
    return distributional_count(T, x, y, n, tau) / n


# ---------------------------------------------------------------------------
# envelope search
# ---------------------------------------------------------------------------


def _envelope_pairs(
    rec: OrbitRecord,
    low_log: Callable[[int], float],
    high_log: Callable[[int], float],
    start: int,
    k_max: int,
) -> tuple[list[tuple[int, int]], Optional[tuple[str, int]]]:
    """Greedy interleaved n_1 < m_1 < n_2 < m_2 < ... (earliest choice is optimal)."""
    pairs: list[tuple[int, int]] = []
    pos = start
    for k in range(1, k_max + 1):
        n = rec.first_below(low_log(k), pos)
        if n is None:
            return pairs, ("low", pos)
        m = rec.first_above(high_log(k), n + 1)
        if m is None:
            return pairs, ("high", n + 1)
        pairs.append((n, m))
        pos = m + 1
    return pairs, None


def _chain(rec: OrbitRecord, thr_log: Callable[[int], float], below: bool, allowed: IndexSet, k_max: int) -> list[int]:
    """Greedy increasing n_1 < n_2 < ... with the k-th value beyond thr_log(k)."""
    out: list[int] = []
    pos = 1
    for k in range(1, k_max + 1):
        n = rec.first_below(thr_log(k), pos) if below else rec.first_above(thr_log(k), pos)
        if n is None:
            break
        assert n in allowed
        out.append(n)
        pos = n + 1
    return out


def _orbit(T, x, horizon, budget, rec):
    if rec is not None:
        if rec.horizon < horizon:
            raise ValueError("supplied orbit is shorter than the horizon")
        return rec
    return orbit(T, x, horizon, budget)


# ---------------------------------------------------------------------------
# irregular vectors and Li-Yorke pairs
# ---------------------------------------------------------------------------


def irregular_test(
    T: OperatorSpec,
    x: SparseVector,
    horizon: int,
    low: float,
    high: float,
    K: int = 3,
    *,
    budget: int = DEFAULT_BUDGET,
    record: Optional[OrbitRecord] = None,
) -> Certificate | Rejection:
    """Evidence that liminf ||T^n x|| = 0 and limsup ||T^n x|| = infinity.

    Accepts iff interleaved 1 <= n_1 < m_1 < ... <= horizon exist with
    ||T^{n_k} x|| < low 2^-k and ||T^{m_k} x|| > high 2^k for k = 1..K.
    """
    if horizon < 10:
        raise PreconditionViolation("horizon must be >= 10", horizon=horizon)
    if not 1 <= K <= K_CAP:
        raise PreconditionViolation(f"K must be in [1, {K_CAP}]", K=K)
    ll, lh = _log(low, "low"), _log(high, "high")
    rec = _orbit(T, x, horizon, budget, record)
    pairs, block = _envelope_pairs(rec, lambda k: ll - k * LOG2, lambda k: lh + k * LOG2, 1, K_CAP)
    if len(pairs) < K:
        side, idx = block if block else ("low", horizon)
        return Rejection("irregular_test", "envelope not reached", side, len(pairs), idx)
    params = {"horizon": str(horizon), "low": _dec(low), "high": _dec(high), "K": str(K)}
    return Certificate(
        "IrregularVector",
        "irregular_test",
        T,
        {"x": x},
        params,
        {
            "lows": IndexSet.from_indices([n for n, _ in pairs], {"below": "low*2^-k"}),
            "highs": IndexSet.from_indices([m for _, m in pairs], {"above": "high*2^k"}),
        },
        _pair_evidence(rec, pairs, lambda k: ll - k * LOG2, lambda k: lh + k * LOG2),
    )


def _pair_evidence(rec, pairs, low_log, high_log) -> dict[str, Any]:
    rows = []
    for k, (n, m) in enumerate(pairs, start=1):
        rows.append(
            {
                "k": k,
                "n": str(n),
                "m": str(m),
                "lognorm_n": to_decimal(rec.lognorm_at(n)),
                "lognorm_m": to_decimal(rec.lognorm_at(m)),
                "low_envelope": to_decimal(low_log(k)),
                "high_envelope": to_decimal(high_log(k)),
            }
        )
    lo_n, lo_v = rec.extreme(1, rec.horizon + 1, largest=False)
    hi_n, hi_v = rec.extreme(1, rec.horizon + 1, largest=True)
    return {
        "K_achieved": len(pairs),
        "pairs": rows,
        "lognorm_0": to_decimal(rec.lognorm_at(0)),
        "min": {"n": str(lo_n), "lognorm": to_decimal(lo_v)},
        "max": {"n": str(hi_n), "lognorm": to_decimal(hi_v)},
        "label": "finite-horizon evidence",
    }


def liyorke_pair_test(
    T: OperatorSpec,
    x: SparseVector,
    y: SparseVector,
    horizon: int,
    delta: float,
    K: int = 3,
    *,
    budget: int = DEFAULT_BUDGET,
) -> Certificate | Rejection:
    """Evidence that liminf ||T^n x - T^n y|| = 0 and limsup > 0.

    Lows must fall below delta 2^-k; highs only need to exceed the fixed
    bar delta, which is recorded in the certificate.
    """
    if horizon < 10:
        raise PreconditionViolation("horizon must be >= 10", horizon=horizon)
    if not 1 <= K <= K_CAP:
        raise PreconditionViolation(f"K must be in [1, {K_CAP}]", K=K)
    ld = _log(delta, "delta")
    z = x - y
    if z.is_zero:
        return Rejection("liyorke_pair_test", "precondition: x == y")
    rec = orbit(T, z, horizon, budget)
    pairs, block = _envelope_pairs(rec, lambda k: ld - k * LOG2, lambda k: ld, 1, K_CAP)
    if len(pairs) < K:
        side, idx = block if block else ("low", horizon)
        return Rejection("liyorke_pair_test", "envelope not reached", side, len(pairs), idx)
    params = {"horizon": str(horizon), "delta": _dec(delta), "K": str(K)}
    return Certificate(
        "LiYorkePair",
        "liyorke_pair_test",
        T,
        {"x": x, "y": y},
        params,
        {
            "lows": IndexSet.from_indices([n for n, _ in pairs], {"below": "delta*2^-k"}),
            "highs": IndexSet.from_indices([m for _, m in pairs], {"above": "delta"}),
        },
        _pair_evidence(rec, pairs, lambda k: ld - k * LOG2, lambda k: ld),
    )


# ---------------------------------------------------------------------------
# distributional irregularity
# ---------------------------------------------------------------------------


def _checkpoints(A: IndexSet, B: IndexSet, horizon: int, warmup: int) -> list[int]:
    cps = {horizon}
    for S in (A, B):
        cps.update(n for n in S.run_ends() if warmup <= n <= horizon)
    n = 1
    while n <= horizon:
        if n >= warmup:
            cps.add(n)
        n *= 2
    return sorted(cps)


def dirregular_test(
    T: OperatorSpec,
    x: SparseVector,
    horizon: int,
    eps: float,
    density_floor: float = 0.9,
    K: int = 3,
    *,
    scale: float = 1.0,
    warmup: int = DETECTOR_WARMUP,
    budget: int = DEFAULT_BUDGET,
    record: Optional[OrbitRecord] = None,
) -> Certificate | Rejection:
    """Evidence that A = {n : ||T^n x|| < scale eps} and B = {n : ||T^n x|| > scale / eps}
    both have upper density 1, with norms along A tending to 0 and along B to infinity.

    Densities are maximised over the checkpoints n >= warmup where they can
    peak (run ends of A and B), plus powers of two and the horizon.  The
    decay/growth requirement uses envelopes scale eps 2^-k and scale 2^k / eps,
    k = 1..K.  ``scale`` rescales both thresholds together, so the verdict on
    (T, alpha x, scale=|alpha|) equals the verdict on (T, x).
    """
    if not 0 < density_floor < 1:
        raise PreconditionViolation("density_floor must lie in (0, 1)", density_floor=density_floor)
    if not 0 < eps < 1:
        raise PreconditionViolation("eps must lie in (0, 1)", eps=eps)
    if not 1 <= K <= K_CAP:
        raise PreconditionViolation(f"K must be in [1, {K_CAP}]", K=K)
    if x.is_zero:
        return Rejection("dirregular_test", "zero vector", "A")
    le, ls = _log(eps, "eps"), _log(scale, "scale")
    small, large = ls + le, ls - le
    rec = _orbit(T, x, horizon, budget, record)
    A = IndexSet.from_runs(rec.intervals(small, True, 1), {"below": "scale*eps"})
    B = IndexSet.from_runs(rec.intervals(large, False, 1), {"above": "scale/eps"})
    cps = _checkpoints(A, B, horizon, warmup)
    if len(cps) < 3:
        return Rejection("dirregular_test", "fewer than 3 density checkpoints", details={"checkpoints": len(cps)})
    rep_a = density(A, horizon, cps, warmup)
    rep_b = density(B, horizon, cps, warmup)
    floor = Fraction(str(density_floor))
    for side, rep in (("B", rep_b), ("A", rep_a)):
        if rep.udens_exact < floor:
            return Rejection(
                "dirregular_test", "upper density below floor", side, best_density=_dec(rep.udens_estimate)
            )
    chain_a = _chain(rec, lambda k: small - k * LOG2, True, A, K)
    chain_b = _chain(rec, lambda k: large + k * LOG2, False, B, K)
    for side, ch in (("A", chain_a), ("B", chain_b)):
        if len(ch) < K:
            return Rejection("dirregular_test", "envelope not reached", side, len(ch))
    params = {
        "horizon": str(horizon),
        "eps": _dec(eps),
        "density_floor": _dec(density_floor),
        "K": str(K),
        "scale": _dec(scale),
        "warmup": str(warmup),
    }
    evidence = {
        "density_A": rep_a.to_json(),
        "density_B": rep_b.to_json(),
        "chain_A": [[str(n), to_decimal(rec.lognorm_at(n))] for n in chain_a],
        "chain_B": [[str(n), to_decimal(rec.lognorm_at(n))] for n in chain_b],
        "label": "finite-horizon evidence",
    }
    return Certificate(
        "DistributionallyIrregularVector",
        "dirregular_test",
        T,
        {"x": x},
        params,
        {"A": A, "B": B},
        evidence,
    )


def dirregular_pair_test(
    T: OperatorSpec,
    x: SparseVector,
    y: SparseVector,
    horizon: int,
    eps: float,
    density_floor: float = 0.9,
    K: int = 3,
    *,
    scale: float = 1.0,
    warmup: int = DETECTOR_WARMUP,
    budget: int = DEFAULT_BUDGET,
) -> Certificate | Rejection:
    """Distributional-pair evidence for (x, y): the difference x - y passes
    dirregular_test, so F*(tau) = 1 for every tau and F(eps') = 0 for eps' = scale/eps."""
    z = x - y
    if z.is_zero:
        return Rejection("dirregular_pair_test", "precondition: x == y")
    return dirregular_test(T, z, horizon, eps, density_floor, K, scale=scale, warmup=warmup, budget=budget)


def scrambled_line_check(
    T: OperatorSpec,
    u: SparseVector,
    sample_scalars: Sequence[float],
    horizon: int,
    eps: float,
    density_floor: float = 0.9,
    K: int = 3,
    *,
    warmup: int = DETECTOR_WARMUP,
    budget: int = DEFAULT_BUDGET,
) -> bool:
    """True iff every pair of distinct sampled scalars a != b gives a
    distributional pair (a u, b u) with the same index sets as u itself
    (thresholds scaled by |a - b|)."""
    base = dirregular_test(T, u, horizon, eps, density_floor, K, warmup=warmup, budget=budget)
    if not base.accepted:
        return False
    assert isinstance(base, Certificate)
    scalars = [float(a) for a in sample_scalars]
    for i, a in enumerate(scalars):
        for b in scalars[i + 1 :]:
            if a == b:
                continue
            diff = u.scale(a) - u.scale(b)
            c = dirregular_test(T, diff, horizon, eps, density_floor, K, scale=abs(a - b), warmup=warmup, budget=budget)
            if not c.accepted:
                return False
            assert isinstance(c, Certificate)
            if c.index_sets["A"].runs != base.index_sets["A"].runs or c.index_sets["B"].runs != base.index_sets["B"].runs:
                return False
    return True


def _line_certificate(claim: str, detector: str):
    def run(
        T: OperatorSpec,
        u: SparseVector,
        sample_scalars: Sequence[float],
        horizon: int,
        eps: float,
        density_floor: float = 0.9,
        K: int = 3,
        *,
        warmup: int = DETECTOR_WARMUP,
        budget: int = DEFAULT_BUDGET,
    ) -> Certificate | Rejection:
        base = dirregular_test(T, u, horizon, eps, density_floor, K, warmup=warmup, budget=budget)
        if not base.accepted:
            return Rejection(detector, f"u is not distributionally irregular: {base.reason}")  # type: ignore[union-attr]
        if not scrambled_line_check(T, u, sample_scalars, horizon, eps, density_floor, K, warmup=warmup, budget=budget):
            return Rejection(detector, "a sampled pair failed")
        assert isinstance(base, Certificate)
        params = dict(base.params)
        del params["scale"]
        params["scalars"] = [_dec(a) for a in sample_scalars]
        return Certificate(claim, detector, T, {"u": u}, params, base.index_sets, base.evidence)

    run.__name__ = detector
    run.__doc__ = (
        f"{claim} certificate for span{{u}}: u passes dirregular_test and every sampled "
        "pair of distinct multiples passes scrambled_line_check."
    )
    return run


scrambled_line_test = _line_certificate("ScrambledLine", "scrambled_line_test")
distributional_chaos_test = _line_certificate("DistributionalChaos", "distributional_chaos_test")


# ---------------------------------------------------------------------------
# re-running a certificate
# ---------------------------------------------------------------------------

_INT = int


def _f(s: str) -> float:
    return float(s)


_PARAM_TYPES: dict[str, dict[str, Callable[[Any], Any]]] = {
    "irregular_test": {"horizon": _INT, "low": _f, "high": _f, "K": _INT},
    "liyorke_pair_test": {"horizon": _INT, "delta": _f, "K": _INT},
    "dirregular_test": {
        "horizon": _INT,
        "eps": _f,
        "density_floor": _f,
        "K": _INT,
        "scale": _f,
        "warmup": _INT,
    },
    "scrambled_line_test": {
        "horizon": _INT,
        "eps": _f,
        "density_floor": _f,
        "K": _INT,
        "warmup": _INT,
        "scalars": lambda xs: [float(a) for a in xs],
    },
}
_PARAM_TYPES["distributional_chaos_test"] = _PARAM_TYPES["scrambled_line_test"]


def rerun(cert: Certificate) -> Certificate | Rejection:
    """Repeat the detector run recorded in ``cert`` from its stored inputs."""
    types = _PARAM_TYPES.get(cert.detector)
    if types is None:
        return Rejection(cert.detector, f"unknown detector {cert.detector!r}")
    if set(cert.params) != set(types):
        return Rejection(cert.detector, "parameter set differs from the detector signature")
    p = {k: conv(cert.params[k]) for k, conv in types.items()}
    T, w = cert.operator, cert.witnesses
    try:
        if cert.detector == "irregular_test":
            return irregular_test(T, w["x"], p["horizon"], p["low"], p["high"], p["K"])
        if cert.detector == "liyorke_pair_test":
            return liyorke_pair_test(T, w["x"], w["y"], p["horizon"], p["delta"], p["K"])
        if cert.detector == "dirregular_test":
            return dirregular_test(
                T, w["x"], p["horizon"], p["eps"], p["density_floor"], p["K"], scale=p["scale"], warmup=p["warmup"]
            )
        fn = scrambled_line_test if cert.detector == "scrambled_line_test" else distributional_chaos_test
        return fn(T, w["u"], p["scalars"], p["horizon"], p["eps"], p["density_floor"], p["K"], warmup=p["warmup"])
    except KeyError as exc:
        return Rejection(cert.detector, f"missing witness {exc}")
    except PreconditionViolation as exc:
        return Rejection(cert.detector, f"precondition: {exc}")


DETECTORS = {
    "irregular_test": irregular_test,
    "liyorke_pair_test": liyorke_pair_test,
    "dirregular_test": dirregular_test,
    "scrambled_line_test": scrambled_line_test,
    "distributional_chaos_test": distributional_chaos_test,
}
