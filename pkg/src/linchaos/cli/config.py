"""Experiment configuration: schema, shorthand parsers, environment overrides."""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import SchemaError
from ..operators import DEFAULT_BUDGET, OperatorSpec
from ..seqspace import SpaceSpec, SparseVector, WeightSequence

ENV_PREFIX = "LINCHAOS_"
DETECTOR_NAMES = ("irregular_test", "liyorke_pair_test", "dirregular_test")
CERTIFY_DETECTORS = DETECTOR_NAMES + ("scrambled_line_test", "distributional_chaos_test")
CONSTRUCTORS = (
    "oscillating_block_weights",
    "irregular_from_bounded_oscillation",
    "irregular_from_lycc",
    "backward_shift_irregular_seed",
    "dirregular_from_dcc",
    "dense_irregular_manifold",
    "design_di_forward_weights",
    "existence_operator",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Thresholds(_Strict):
    low: float = Field(1.0, gt=0)
    high: float = Field(1.0, gt=0)
    delta: float = Field(0.5, gt=0)
    eps: float = Field(0.5, gt=0, lt=1)
    density_floor: float = Field(0.9, gt=0, lt=1)
    K: int = Field(3, ge=1)


class ConstructSpec(_Strict):
    name: Literal[CONSTRUCTORS]  # type: ignore[valid-type]
    params: dict[str, Any] = Field(default_factory=dict)


class Outputs(_Strict):
    orbit_csv: bool = False
    report: str = "report.json"


class ExperimentConfig(_Strict):
    task: Literal["analyze", "construct", "certify", "verify-certificate"]
    operator: Optional[dict[str, Any]] = None
    seeds: Optional[list[Any]] = None
    horizon: int = Field(4096, ge=10)
    detectors: list[Literal[DETECTOR_NAMES]] = Field(default_factory=lambda: list(DETECTOR_NAMES))  # type: ignore[valid-type]
    thresholds: Thresholds = Field(default_factory=Thresholds)
    wbs_seed: bool = True
    wbs_terms: int = Field(4, ge=1)
    detector: Optional[Literal[CERTIFY_DETECTORS]] = None  # type: ignore[valid-type]
    witnesses: dict[str, Any] = Field(default_factory=dict)
    scalars: list[float] = Field(default_factory=list)
    construction: Optional[ConstructSpec] = Field(None, alias="construct")
    certificate: Optional[str] = None
    budget: Optional[int] = Field(None, ge=1)
    workers: int = Field(1, ge=1)
    outputs: Outputs = Field(default_factory=Outputs)

    @model_validator(mode="after")
    def _task_fields(self) -> ExperimentConfig:
        need = {
            "analyze": ("operator",),
            "certify": ("operator", "detector"),
            "construct": ("construction",),
            "verify-certificate": ("certificate",),
        }[self.task]
        missing = [f for f in need if getattr(self, f) is None]
        if missing:
            shown = ["construct" if f == "construction" else f for f in missing]
            raise ValueError(f"task {self.task!r} needs {', '.join(shown)}")
        return self


def _flatten_errors(exc: ValidationError) -> str:
    return "; ".join(f"{'.'.join(map(str, e['loc'])) or '$'}: {e['msg']}" for e in exc.errors())


def load_config(path: Path, overrides: Mapping[str, Any] = {}) -> ExperimentConfig:
    """Read a JSON config, apply LINCHAOS_* environment variables, then
    command-line overrides (highest precedence)."""
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise SchemaError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("config must be a JSON object")
    for key in ("budget", "workers", "horizon"):
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            try:
                raw[key] = int(env)
            except ValueError as exc:
                raise SchemaError(f"{ENV_PREFIX}{key.upper()} must be an integer") from exc
    raw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise SchemaError(_flatten_errors(exc)) from exc


def budget_of(cfg: ExperimentConfig) -> int:
    return cfg.budget if cfg.budget is not None else DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# shorthand parsers
# ---------------------------------------------------------------------------


def parse_weights(d: Any) -> WeightSequence:
    """WeightSequence JSON, or one of
    {"constant": c}, {"geometric": r, "scale": s}, {"power_law": e, "scale": s, "offset": o},
    {"blocks": {"values", "base", "slope"}}, {"runs": {"values", "lengths", "final"}},
    {"oscillating": {"peak", "trough_decay", "n_blocks"}},
    {"di_design": {"density_target", "n_stages"}}, each with an optional "prefix"."""
    if not isinstance(d, Mapping):
        raise SchemaError("weights must be an object")
    if "tail" in d:
        return WeightSequence.from_json(dict(d))
    keys = set(d) - {"prefix", "scale", "offset"}
    if len(keys) != 1:
        raise SchemaError(f"weights need exactly one kind, got {sorted(keys)}")
    kind = keys.pop()
    pre = [float(x) for x in d.get("prefix", [])]
    try:
        if kind == "constant":
            return WeightSequence.constant(float(d["constant"]), pre)
        if kind == "geometric":
            return WeightSequence.geometric(float(d["geometric"]), float(d.get("scale", 1.0)), pre)
        if kind == "power_law":
            return WeightSequence.power_law(float(d["power_law"]), float(d.get("scale", 1.0)), float(d.get("offset", 0.0)), pre)
        if kind == "blocks":
            b = d["blocks"]
            return WeightSequence.blocks(b["values"], b["base"], b["slope"], pre)
        if kind == "runs":
            r = d["runs"]
            return WeightSequence.runs(r["values"], r["lengths"], float(r.get("final", 1.0)), pre)
        if kind == "oscillating":
            from ..constructors import oscillating_block_weights

            o = d["oscillating"]
            return oscillating_block_weights(float(o["peak"]), float(o["trough_decay"]), o.get("n_blocks"))
        if kind == "di_design":
            from ..constructors import design_di_forward_weights

            o = d["di_design"]
            return design_di_forward_weights(float(o["density_target"]), int(o["n_stages"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"bad {kind} weights: {exc}") from exc
    raise SchemaError(f"unknown weight kind {kind!r}")


def parse_space(d: Any) -> SpaceSpec:
    """SpaceSpec JSON, or {"p": 2 | "c0", "v": <weights>}."""
    if d is None:
        return SpaceSpec.lp(2.0)
    if not isinstance(d, Mapping):
        raise SchemaError("space must be an object")
    if "kind" in d:
        return SpaceSpec.from_json(dict(d))
    v = parse_weights(d["v"]) if "v" in d else None
    p = d.get("p", 2)
    if p == "c0":
        return SpaceSpec.c0(v)
    try:
        p = float(p)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad p {p!r}") from exc
    if not (p >= 1 and math.isfinite(p)):
        raise SchemaError(f"p must be finite and >= 1, got {p}")
    return SpaceSpec.lp(p, v)


def parse_operator(d: Any) -> OperatorSpec:
    """OperatorSpec JSON (with "params"), or
    {"kind", "w": <weights>, "space": <space>, "lam", "inner", "matrix"}."""
    if not isinstance(d, Mapping) or "kind" not in d:
        raise SchemaError("operator must be an object with a kind")
    if "params" in d:
        return OperatorSpec.from_json(d)
    extra = set(d) - {"kind", "w", "space", "lam", "inner", "matrix"}
    if extra:
        raise SchemaError(f"unknown operator fields {sorted(extra)}")
    space = parse_space(d.get("space"))
    try:
        w = parse_weights(d["w"]) if "w" in d else None
        inner = parse_operator(d["inner"]) if "inner" in d else None
        lam = None
        if "lam" in d:
            from ..seqspace import LogReal

            lam = LogReal.of(float(d["lam"]))
        matrix = tuple(tuple(float(a) for a in r) for r in d["matrix"]) if "matrix" in d else None
        if d["kind"] == "ScalarPlus" and inner is not None:
            space = inner.space
        return OperatorSpec(d["kind"], space, w=w, lam=lam, inner=inner, matrix=matrix)
    except SchemaError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad operator: {exc}") from exc


def parse_vector(d: Any) -> SparseVector:
    """SparseVector JSON, {"basis": i}, or {"entries": {"i": value}}."""
    if isinstance(d, Mapping):
        if set(d) == {"basis"}:
            i = d["basis"]
            if not isinstance(i, int) or i < 0:
                raise SchemaError(f"basis index must be a non-negative integer, got {i!r}")
            return SparseVector.basis(i)
        if set(d) == {"entries"}:
            try:
                return SparseVector.from_dict({int(k): float(v) for k, v in d["entries"].items()})
            except (AttributeError, TypeError, ValueError) as exc:
                raise SchemaError(f"bad vector entries: {exc}") from exc
        raise SchemaError(f"unknown vector form {sorted(d)}")
    return SparseVector.from_json(d)
