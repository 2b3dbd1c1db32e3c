"""Command-line experiment runner.

    linchaos --config experiment.json [--out DIR] [--workers N] [--budget B]

Exit codes: 0 success, 2 schema error, 3 rejection (diagnostics on
stderr), 4 resource budget exceeded.  Environment variables
LINCHAOS_BUDGET, LINCHAOS_WORKERS and LINCHAOS_HORIZON override the config;
command-line flags override both.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..errors import PreconditionViolation, ResourceLimitError, SchemaError, SelectionFailure, UnsupportedKind
from .config import ExperimentConfig, load_config
from .tasks import EXIT_BUDGET, EXIT_REJECTED, EXIT_SCHEMA, Outcome, analyze, certify, construct, verify, write_atomic

__all__ = ["ExperimentConfig", "load_config", "main", "run"]


def run(cfg: ExperimentConfig, out_dir: Path, base: Path = Path(".")) -> Outcome:
    """Execute one task and write its artifacts under ``out_dir``."""
    if cfg.task == "analyze":
        res = analyze(cfg)
    elif cfg.task == "construct":
        res = construct(cfg)
    elif cfg.task == "certify":
        res = certify(cfg)
    else:
        res = verify(cfg, base)
    for rel, text in sorted(res.files.items()):
        write_atomic(out_dir / rel, text)
    return res


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="linchaos", description="Chaos certificates for weighted shift operators.")
    ap.add_argument("--config", required=True, type=Path, help="experiment JSON")
    ap.add_argument("--out", type=Path, default=None, help="output directory (default: ./linchaos-out)")
    ap.add_argument("--workers", type=int, default=None, help="parallel detector runs")
    ap.add_argument("--budget", type=int, default=None, help="orbit work budget")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    out_dir = args.out if args.out is not None else Path("linchaos-out")
    try:
        cfg = load_config(args.config, {"workers": args.workers, "budget": args.budget})
        res = run(cfg, out_dir, args.config.parent)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ResourceLimitError as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (PreconditionViolation, SelectionFailure, UnsupportedKind) as exc:
        details = getattr(exc, "details", {})
        deepest = getattr(exc, "deepest", None)
        extra = {**details, **({"deepest": deepest} if deepest is not None else {})}
        print(f"rejected: {type(exc).__name__}: {exc} {extra if extra else ''}".rstrip(), file=sys.stderr)
        return EXIT_REJECTED
    for line in res.summary:
        print(line)
    for line in res.diagnostics:
        print(line, file=sys.stderr)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
