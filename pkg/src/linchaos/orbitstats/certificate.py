"""Certificates: re-verifiable evidence bundles for chaos claims."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

from ..operators import OperatorSpec
from ..seqspace import SparseVector
from .density import IndexSet

SCHEMA = "linchaos.certificate/1"
CLAIMS = (
    "LiYorkePair",
    "IrregularVector",
    "DistributionallyIrregularVector",
    "ScrambledLine",
    "DistributionalChaos",
)


@dataclass(frozen=True)
class Certificate:
    """Accepted detector run.

    ``params`` holds every detector argument as a string so that the run can
    be repeated from the JSON alone; ``evidence`` holds the recomputable
    numbers (log-values as 17-digit decimal strings).
    """

    claim: str
    detector: str
    operator: OperatorSpec
    witnesses: dict[str, SparseVector]
    params: dict[str, Any]
    index_sets: dict[str, IndexSet] = field(default_factory=dict)
    evidence: dict[str, Any] = field(default_factory=dict)

    accepted = True

    def __post_init__(self) -> None:
        if self.claim not in CLAIMS:
            raise ValueError(f"unknown claim {self.claim!r}")

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA,
            "claim": self.claim,
            "detector": self.detector,
            "operator": self.operator.to_json(),
            "witnesses": {k: v.to_json() for k, v in sorted(self.witnesses.items())},
            "params": dict(sorted(self.params.items())),
            "index_sets": {k: s.to_json() for k, s in sorted(self.index_sets.items())},
            "evidence": self.evidence,
        }

    def dumps(self) -> str:
        return canonical_dumps(self.to_json())

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> Certificate:
        if d.get("schema") != SCHEMA:
            raise ValueError(f"not a certificate (schema {d.get('schema')!r})")
        return cls(
            claim=d["claim"],
            detector=d["detector"],
            operator=OperatorSpec.from_json(d["operator"]),
            witnesses={k: SparseVector.from_json(v) for k, v in d["witnesses"].items()},
            params=dict(d["params"]),
            index_sets={k: IndexSet.from_json(s) for k, s in d.get("index_sets", {}).items()},
            evidence=d.get("evidence", {}),
        )


@dataclass(frozen=True)
class Rejection:
    """Detector verdict 'no evidence found', with diagnostics."""

    detector: str
    reason: str
    side: Optional[str] = None
    best_k: int = 0
    blocking_index: Optional[int] = None
    best_density: Optional[str] = None
    details: dict[str, Any] = field(default_factory=dict)

    accepted = False

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"verdict": "rejected", "detector": self.detector, "reason": self.reason}
        if self.side is not None:
            d["side"] = self.side
        d["best_k"] = self.best_k
        if self.blocking_index is not None:
            d["blocking_index"] = str(self.blocking_index)
        if self.best_density is not None:
            d["best_density"] = self.best_density
        if self.details:
            d["details"] = self.details
        return d


def canonical_dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, fixed separators, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def first_mismatch(a: Any, b: Any, path: str = "$") -> Optional[str]:
    """Path of the first differing field between two JSON values, else None."""
    if isinstance(a, dict) and isinstance(b, dict):
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                return f"{path}.{k}"
            sub = first_mismatch(a[k], b[k], f"{path}.{k}")
            if sub:
                return sub
        return None
    if isinstance(a, list) and isinstance(b, list):
        for i, (x, y) in enumerate(zip(a, b)):
            sub = first_mismatch(x, y, f"{path}[{i}]")
            if sub:
                return sub
        if len(a) != len(b):
            return f"{path}[{min(len(a), len(b))}]"
        return None
    return None if (type(a) is type(b) and a == b) else path


@dataclass(frozen=True)
class Verification:
    ok: bool
    mismatch: Optional[str] = None
    stored: Any = None
    recomputed: Any = None
    message: str = ""

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"ok": self.ok}
        if not self.ok:
            d.update(mismatch=self.mismatch, stored=self.stored, recomputed=self.recomputed, message=self.message)
        return d


def _lookup(obj: Any, path: str) -> Any:
    import re

    cur = obj
    for key, idx in re.findall(r"\.([^.\[]+)|\[(\d+)\]", path):
        try:
            cur = cur[key] if key else cur[int(idx)]
        except (KeyError, IndexError, TypeError):
            return None
    return cur


def verify_certificate(cert: Certificate | dict[str, Any]) -> Verification:
    """Re-run the detector named in the certificate and diff the result.

    Accepts a Certificate or its JSON; the JSON path is preferred because it
    catches edits that a parse/re-serialise cycle would normalise away.
    """
    from .detectors import rerun

    stored = cert.to_json() if isinstance(cert, Certificate) else cert
    try:
        parsed = Certificate.from_json(stored)
    except (KeyError, ValueError, TypeError) as exc:
        return Verification(False, "$", message=f"unreadable certificate: {exc}")
    result = rerun(parsed)
    if not result.accepted:
        return Verification(False, "$.claim", stored["claim"], "rejected", f"detector now rejects: {result.reason}")
    fresh = result.to_json()
    path = first_mismatch(stored, fresh)
    if path is None:
        return Verification(True)
    return Verification(False, path, _lookup(stored, path), _lookup(fresh, path), "evidence differs")
