"""The four tasks: analyze, construct, certify, verify-certificate."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from ..constructors import (
    MaskFamily,
    backward_shift_irregular_seed,
    block_crests,
    dense_irregular_manifold,
    design_di_forward_weights,
    dirregular_from_dcc,
    doubling_shift_dcc_inputs,
    existence_operator,
    irregular_from_bounded_oscillation,
    irregular_from_lycc,
    oscillating_block_weights,
    verify_di_design,
)
from ..criteria import compute_Mv, compute_Mw, spectral_consistency_check
from ..errors import SchemaError
from ..operators import OperatorSpec, orbit, spectral_radius_estimate
from ..orbitstats import (
    Certificate,
    Rejection,
    canonical_dumps,
    dirregular_test,
    distributional_chaos_test,
    irregular_test,
    liyorke_pair_test,
    scrambled_line_test,
    verify_certificate,
)
from ..seqspace import LogReal, SparseVector, to_decimal
from .config import ExperimentConfig, budget_of, parse_operator, parse_vector

EXIT_OK, EXIT_SCHEMA, EXIT_REJECTED, EXIT_BUDGET = 0, 2, 3, 4
DEFAULT_SEEDS = 4


@dataclass
class Outcome:
    """Task result: files to write (relative path -> text), summary lines
    for stdout, diagnostics for stderr, exit code."""

    code: int = EXIT_OK
    files: dict[str, str] = field(default_factory=dict)
    summary: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _lin(lr: Optional[LogReal]) -> Optional[str]:
    if lr is None:
        return None
    x = float(lr)
    return format(x, ".17g") if math.isfinite(x) else None


def _logreal_json(lr: LogReal) -> dict[str, Any]:
    d: dict[str, Any] = {"log": to_decimal(lr.logmag)}
    lin = _lin(lr)
    if lin is not None:
        d["value"] = lin
    return d


def orbit_csv(T: OperatorSpec, x: SparseVector, horizon: int, budget: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "log_norm", "norm"])
    for n, lv in orbit(T, x, horizon, budget).csv_rows():
        lin = _lin(LogReal.from_log(float(lv)))
        w.writerow([n, lv, lin if lin is not None else ""])
    return buf.getvalue()


def _verdict_json(v: Any) -> dict[str, Any]:
    if isinstance(v, Certificate):
        return {"verdict": "accepted", "claim": v.claim, "detector": v.detector, "evidence": v.evidence}
    return v.to_json()


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _run_detector(job: tuple[str, OperatorSpec, SparseVector, int, dict[str, Any], int]) -> Certificate | Rejection:
    name, T, x, horizon, th, budget = job
    if name == "irregular_test":
        return irregular_test(T, x, horizon, th["low"], th["high"], th["K"], budget=budget)
    if name == "liyorke_pair_test":
        return liyorke_pair_test(T, x, SparseVector(), horizon, th["delta"], th["K"], budget=budget)
    return dirregular_test(T, x, horizon, th["eps"], th["density_floor"], th["K"], budget=budget)


def _map(jobs: Sequence[Any], fn: Any, workers: int) -> list[Any]:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))


def _suprema(T: OperatorSpec) -> Optional[Any]:
    if T.kind == "BackwardShift":
        return compute_Mv(T.space.v)
    if T.kind == "WeightedBackwardShift":
        assert T.w is not None
        return compute_Mw(T.w)
    return None


def analyze(cfg: ExperimentConfig) -> Outcome:
    out = Outcome()
    T = parse_operator(cfg.operator)
    budget = budget_of(cfg)
    if cfg.seeds is not None:
        seeds = [parse_vector(s) for s in cfg.seeds]
    else:
        n = DEFAULT_SEEDS if T.dim < 0 else min(DEFAULT_SEEDS, T.dim)
        seeds = [SparseVector.basis(i) for i in range(n)]
    th = cfg.thresholds.model_dump()
    report: dict[str, Any] = {"operator": T.to_json(), "horizon": str(cfg.horizon)}

    sup = _suprema(T)
    if sup is not None:
        report["supremum"] = sup.to_json()
        shown = "Infinite" if sup.is_infinite else (_lin(sup.value) or sup.verdict)
        out.summary.append(f"{sup.name} = {shown}")

    est = spectral_radius_estimate(T)
    report["spectral_radius"] = {
        "lower": _logreal_json(est.lower),
        "upper": _logreal_json(est.upper),
        "exact": est.exact,
        "method": est.method,
    }
    r_txt = _lin(est.upper) if est.exact else f"[{_lin(est.lower)}, {_lin(est.upper)}]"
    out.summary.append(f"r(T) = {r_txt} ({est.method})")

    jobs = [(name, T, x, cfg.horizon, th, budget) for x in seeds for name in cfg.detectors]
    results = _map(jobs, _run_detector, cfg.workers)
    certs: list[Certificate] = []
    runs = []
    for (name, _, x, *_), res in zip(jobs, results):
        i = seeds.index(x)
        runs.append({"seed": i, "detector": name, **_verdict_json(res)})
        if isinstance(res, Certificate):
            certs.append(res)
            out.files[f"certificates/seed{i}_{name}.json"] = res.dumps()
    report["detector_runs"] = runs

    if cfg.wbs_seed and sup is not None and sup.is_infinite:
        c = backward_shift_irregular_seed(T, cfg.wbs_terms, budget=budget)
        h = max(c.indices["n"]) + 5
        v = irregular_test(T, c.vector, h, th["low"], th["high"], th["K"], budget=budget)
        report["wbs_seed"] = {"construction": c.to_json(), "irregular_test": _verdict_json(v)}
        out.files["construction_wbs_seed.json"] = canonical_dumps(c.to_json())
        if isinstance(v, Certificate):
            certs.append(v)
            out.files["certificates/wbs_seed_irregular_test.json"] = v.dumps()
        out.summary.append(f"wbs irregular seed: I = {list(c.indices['I'])}, irregular_test {'accepted' if v.accepted else 'rejected'}")

    ly = [c for c in certs if c.claim in ("IrregularVector", "LiYorkePair")]
    di = [c for c in certs if c.claim == "DistributionallyIrregularVector"]
    report["li_yorke"] = {"accepted": bool(ly), "via": sorted({c.detector for c in ly})}
    report["distributional"] = {"accepted": bool(di), "via": sorted({c.detector for c in di})}
    report["spectral_consistency"] = spectral_consistency_check(T, certs).to_json()
    out.summary.append(f"Li-Yorke: {'accepted' if ly else 'not certified'}")
    out.summary.append(f"distributional irregularity: {'accepted' if di else 'not certified'}")
    out.summary.append(f"detector runs: {len(runs)}, certificates: {len(certs)}")
    out.files[cfg.outputs.report] = canonical_dumps(report)
    if cfg.outputs.orbit_csv:
        for i, x in enumerate(seeds):
            out.files[f"orbits/seed{i}.csv"] = orbit_csv(T, x, cfg.horizon, budget)
    return out


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------


def _p(params: dict[str, Any], key: str, default: Any = ...) -> Any:
    if key in params:
        return params[key]
    if default is ...:
        raise SchemaError(f"constructor parameter {key!r} is required")
    return default


def _check_params(params: dict[str, Any], allowed: set[str]) -> None:
    extra = set(params) - allowed
    if extra:
        raise SchemaError(f"unknown constructor parameters {sorted(extra)}")


def _masks(d: Any) -> MaskFamily:
    if d is None or d == {"kind": "two_adic"}:
        return MaskFamily.two_adic()
    if not isinstance(d, dict) or "kind" not in d:
        raise SchemaError("masks must be an object with a kind")
    if d["kind"] == "residues":
        return MaskFamily.residues(int(d["n"]))
    if d["kind"] == "periodic":
        return MaskFamily.periodic(int(d["period"]), {int(k): v for k, v in d["classes"].items()})
    raise SchemaError(f"unknown mask kind {d['kind']!r}")


def _dcc_inputs(cfg: ExperimentConfig, p: dict[str, Any]) -> tuple[OperatorSpec, list[SparseVector], list[int]]:
    if "setup" in p:
        s = p["setup"]
        if not isinstance(s, dict) or s.get("kind") != "doubling":
            raise SchemaError("setup must be {'kind': 'doubling', 'm_max', 'growth'}")
        return doubling_shift_dcc_inputs(int(s["m_max"]), s.get("growth", "fast"))
    T = parse_operator(cfg.operator)
    return T, [parse_vector(v) for v in _p(p, "xs")], [int(n) for n in _p(p, "Ns")]


def construct(cfg: ExperimentConfig) -> Outcome:
    assert cfg.construction is not None
    out = Outcome()
    name, p = cfg.construction.name, dict(cfg.construction.params)
    budget = budget_of(cfg)
    th = cfg.thresholds
    result: dict[str, Any] = {"constructor": name}
    ok = True
    vector: Optional[SparseVector] = None
    T: Optional[OperatorSpec] = None
    verdict: Any = None

    if name == "oscillating_block_weights":
        _check_params(p, {"peak", "trough_decay", "n_blocks", "crests"})
        w = oscillating_block_weights(float(_p(p, "peak")), float(_p(p, "trough_decay")), _p(p, "n_blocks", None))
        result["weights"] = w.to_json()
        nc = int(_p(p, "crests", 8))
        result["crests"] = [[str(a), str(b)] for a, b in block_crests(float(p["peak"]), float(p["trough_decay"]), nc)]
    elif name == "design_di_forward_weights":
        _check_params(p, {"density_target", "n_stages"})
        t = float(_p(p, "density_target"))
        w = design_di_forward_weights(t, int(_p(p, "n_stages")))
        chk = verify_di_design(w, t, th.eps, th.K)
        result.update(
            weights=w.to_json(),
            horizon=str(chk.horizon),
            density_floor=format(chk.density_floor, ".17g"),
            insufficient_evidence=chk.insufficient_evidence,
            verdict=_verdict_json(chk.verdict),
        )
        verdict = chk.verdict
        ok = chk.accepted
    elif name == "existence_operator":
        _check_params(p, {"m_max", "sample_cap"})
        rep = existence_operator(int(_p(p, "m_max")), sample_cap=int(_p(p, "sample_cap", 10_000)))
        result["report"] = rep.to_json()
        ok = rep.ok
        if not ok:
            out.diagnostics.append(f"beta fractions {rep.fractions}: nondecreasing={rep.beta_nondecreasing()}")
    elif name == "dense_irregular_manifold":
        _check_params(p, {"setup", "xs", "Ns", "ys", "masks", "m_max", "horizon"})
        T, xs, Ns = _dcc_inputs(cfg, p)
        c = dirregular_from_dcc(T, xs, Ns, eps=th.eps, density_floor=th.density_floor, K=th.K, budget=budget)
        ys = [parse_vector(v) for v in p["ys"]] if "ys" in p else [SparseVector.basis(i) for i in range(10)]
        rep = dense_irregular_manifold(
            T,
            ys,
            c.plan.terms,
            _masks(p.get("masks")),
            int(_p(p, "m_max")),
            eps=th.eps,
            density_floor=th.density_floor,
            K=th.K,
            horizon=p.get("horizon"),
            budget=budget,
        )
        result.update(series=c.to_json(), manifold=rep.to_json())
        ok = rep.ok
        for coeffs, v in rep.failures()[:5]:
            out.diagnostics.append(f"combination {list(coeffs)} rejected: {v.reason}")
    else:
        if name == "dirregular_from_dcc":
            _check_params(p, {"setup", "xs", "Ns", "strict", "horizon"})
            T, xs, Ns = _dcc_inputs(cfg, p)
            c = dirregular_from_dcc(
                T,
                xs,
                Ns,
                strict=bool(p.get("strict", True)),
                eps=th.eps,
                density_floor=th.density_floor,
                K=th.K,
                horizon=p.get("horizon"),
                budget=budget,
            )
        else:
            T = parse_operator(cfg.operator)
            if name == "irregular_from_bounded_oscillation":
                _check_params(p, {"x", "delta", "horizon", "K"})
                c = irregular_from_bounded_oscillation(
                    T, parse_vector(_p(p, "x")), float(_p(p, "delta")), int(_p(p, "horizon")), int(_p(p, "K", 4)), budget=budget
                )
            elif name == "irregular_from_lycc":
                _check_params(p, {"us", "ms", "ns", "I"})
                c = irregular_from_lycc(
                    T,
                    [parse_vector(u) for u in _p(p, "us")],
                    [int(m) for m in _p(p, "ms")],
                    [int(n) for n in _p(p, "ns")],
                    _p(p, "I", "greedy"),
                    budget=budget,
                )
            else:
                _check_params(p, {"n_terms", "I"})
                c = backward_shift_irregular_seed(T, int(_p(p, "n_terms", 4)), I=_p(p, "I", "greedy"), budget=budget)
                h = max(c.indices["n"]) + 5
                verdict = irregular_test(T, c.vector, h, th.low, th.high, th.K, budget=budget)
        if verdict is None:
            verdict = c.verdict
        result["construction"] = c.to_json()
        vector = c.vector
        ok = c.ok and (verdict is None or verdict.accepted)
        for chk in c.failed()[:5]:
            out.diagnostics.append(f"check failed: {chk.name} (k={chk.k}, index={chk.index})")
        if verdict is not None:
            result["verdict"] = _verdict_json(verdict)
    if isinstance(verdict, Certificate):
        out.files["certificates/construction.json"] = verdict.dumps()
    if verdict is not None and not verdict.accepted:
        out.diagnostics.append(f"detector rejected: {verdict.reason}")
    result["ok"] = ok
    out.files["construction.json"] = canonical_dumps(result)
    if cfg.outputs.orbit_csv and vector is not None and T is not None:
        out.files["orbits/construction.csv"] = orbit_csv(T, vector, cfg.horizon, budget)
    out.summary.append(f"{name}: {'ok' if ok else 'FAILED'}")
    if not ok:
        out.code = EXIT_REJECTED
    return out


# ---------------------------------------------------------------------------
# certify / verify-certificate
# ---------------------------------------------------------------------------


def certify(cfg: ExperimentConfig) -> Outcome:
    out = Outcome()
    T = parse_operator(cfg.operator)
    budget = budget_of(cfg)
    th = cfg.thresholds
    w = {k: parse_vector(v) for k, v in cfg.witnesses.items()}
    name = cfg.detector

    def need(*keys: str) -> list[SparseVector]:
        missing = [k for k in keys if k not in w]
        if missing:
            raise SchemaError(f"{name} needs witnesses {missing}")
        extra = set(w) - set(keys)
        if extra:
            raise SchemaError(f"unknown witnesses {sorted(extra)} for {name}")
        return [w[k] for k in keys]

    if name == "irregular_test":
        (x,) = need("x")
        res = irregular_test(T, x, cfg.horizon, th.low, th.high, th.K, budget=budget)
    elif name == "liyorke_pair_test":
        x, y = need("x", "y")
        res = liyorke_pair_test(T, x, y, cfg.horizon, th.delta, th.K, budget=budget)
    elif name == "dirregular_test":
        (x,) = need("x")
        res = dirregular_test(T, x, cfg.horizon, th.eps, th.density_floor, th.K, budget=budget)
    else:
        (u,) = need("u")
        if len(cfg.scalars) < 2:
            raise SchemaError(f"{name} needs at least two scalars")
        fn = scrambled_line_test if name == "scrambled_line_test" else distributional_chaos_test
        res = fn(T, u, cfg.scalars, cfg.horizon, th.eps, th.density_floor, th.K, budget=budget)
    if isinstance(res, Certificate):
        out.files["certificate.json"] = res.dumps()
        out.summary.append(f"{res.claim}: certificate written")
    else:
        out.code = EXIT_REJECTED
        out.diagnostics.append(json.dumps(res.to_json(), sort_keys=True))
        out.summary.append(f"{name}: rejected ({res.reason})")
    return out


def verify(cfg: ExperimentConfig, base: Path) -> Outcome:
    assert cfg.certificate is not None
    out = Outcome()
    path = Path(cfg.certificate)
    if not path.is_absolute():
        path = base / path
    try:
        stored = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read certificate: {exc}") from exc
    v = verify_certificate(stored)
    out.files["verification.json"] = canonical_dumps(v.to_json())
    if v.ok:
        out.summary.append("certificate verified")
    else:
        out.code = EXIT_REJECTED
        out.diagnostics.append(f"mismatch at {v.mismatch}: stored {v.stored!r}, recomputed {v.recomputed!r} ({v.message})")
        out.summary.append("certificate verification FAILED")
    return out
