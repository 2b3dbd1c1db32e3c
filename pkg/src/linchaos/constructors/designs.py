"""Weight sequences designed so that the forward-shift orbit of e_0 has a
prescribed shape.  The orbit norm ||F_w^n e_0|| is the running product
W(n) = w_0 ... w_{n-1}, so designs are written in log-steps of W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from ..errors import PreconditionViolation
from ..operators import weighted_forward_shift
from ..orbitstats import Certificate, Rejection, dirregular_test
from ..seqspace import RunsTail, SpaceSpec, SparseVector, WeightSequence

_STEP_SEARCH = 1000
_STEP_TOL = 1e-9


def _integral(x: float) -> Optional[int]:
    r = round(x)
    return int(r) if abs(x - r) <= _STEP_TOL * max(1.0, abs(x)) else None


def _common_step(log_peak: float, log_decay: float) -> tuple[float, int, int]:
    """Step u > 0 with log_peak = a u and -log_decay = b u for integers a >= 1, b >= 0."""
    for j in range(1, _STEP_SEARCH + 1):
        u = log_peak / j
        b = _integral(-log_decay / u)
        if b is not None:
            return u, j, b
    raise PreconditionViolation(
        "log(peak) and log(trough_decay) must be commensurable (ratio p/q with p <= 1000)",
        log_peak=log_peak,
        log_decay=log_decay,
    )


def oscillating_block_weights(peak: float, trough_decay: float, n_blocks: Optional[int] = None) -> WeightSequence:
    """Up/down blocks of the weights e^u and e^-u.

    The running product starts at 1, climbs to ``peak`` (crest), then falls
    to trough_decay^(k+1) (trough k+1), and repeats: up-block k has
    a + k b steps and down-block k has a + (k+1) b steps, where
    log peak = a u and -log trough_decay = b u.  Every crest equals ``peak``
    exactly.  ``n_blocks=None`` gives the infinite pattern; otherwise the
    first n_blocks up/down pairs followed by weights 1.
    """
    if not peak > 1:
        raise PreconditionViolation("peak must be > 1", peak=peak)
    if not 0 < trough_decay <= 1:
        raise PreconditionViolation("trough_decay must lie in (0, 1]", trough_decay=trough_decay)
    u, a, b = _common_step(math.log(peak), math.log(trough_decay))
    values = (math.exp(u), math.exp(-u))
    if n_blocks is None:
        return WeightSequence.blocks(values, (a, a + b), (b, b))
    if n_blocks < 0:
        raise PreconditionViolation("n_blocks must be >= 0", n_blocks=n_blocks)
    prefix: list[float] = []
    for k in range(n_blocks):
        prefix += [values[0]] * (a + k * b) + [values[1]] * (a + (k + 1) * b)
    return WeightSequence.constant(1.0, prefix)


def block_crests(peak: float, trough_decay: float, n_blocks: int) -> list[tuple[int, int]]:
    """(crest index, trough index) of the first n_blocks blocks."""
    u, a, b = _common_step(math.log(peak), math.log(trough_decay))
    out, pos = [], 0
    for k in range(n_blocks):
        crest = pos + a + k * b
        trough = crest + a + (k + 1) * b
        out.append((crest, trough))
        pos = trough
    return out


# ---------------------------------------------------------------------------
# distributionally irregular design
# ---------------------------------------------------------------------------


def _stage_level(k: int) -> int:
    return k // 2 + 2


def design_di_forward_weights(density_target: float, n_stages: int) -> WeightSequence:
    """Alternating blocks of 2's (odd stages) and 1/2's (even stages).

    Stage k travels until log2 W passes +-(floor(k/2) + 2) and then stays
    beyond that level for R_k steps, with
    R_k = ceil(target (S_{k-1} + travel_k) / (1 - target)),
    so that the stage alone covers a ``density_target`` fraction of
    [0, S_k).  After the last stage the weights are 1.
    """
    if not 0 < density_target < 1:
        raise PreconditionViolation("density_target must lie in (0, 1)", density_target=density_target)
    if n_stages < 1:
        raise PreconditionViolation("n_stages must be >= 1", n_stages=n_stages)
    t = density_target
    level, total = 0, 0
    values, lengths = [], []
    for k in range(1, n_stages + 1):
        up = k % 2 == 1
        H = _stage_level(k)
        travel = (H - level + 1) if up else (level + H + 1)
        R = math.ceil(t * (total + travel) / (1 - t))
        L = travel + R
        values.append(2.0 if up else 0.5)
        lengths.append(L)
        level += L if up else -L
        total += L
    return WeightSequence.runs(values, lengths, final=1.0)


@dataclass(frozen=True)
class DesignCheck:
    verdict: Union[Certificate, Rejection]
    horizon: int
    density_floor: float
    insufficient_evidence: bool

    @property
    def accepted(self) -> bool:
        return self.verdict.accepted


def verify_di_design(
    w: WeightSequence,
    density_target: float,
    eps: float = 0.5,
    K: int = 3,
    space: Optional[SpaceSpec] = None,
) -> DesignCheck:
    """dirregular_test(e_0) on F_w at the design horizon with floor
    density_target - 0.05.  Fewer than two stages cannot show both a
    small-norm and a large-norm regime and is flagged."""
    if not isinstance(w.tail, RunsTail):
        raise PreconditionViolation("expected weights from design_di_forward_weights")
    horizon = w.P + w.tail.total
    T = weighted_forward_shift(w, space)
    floor = density_target - 0.05
    verdict = dirregular_test(T, SparseVector.basis(0), max(horizon, 10), eps, floor, K)
    return DesignCheck(verdict, horizon, floor, len(w.tail.lengths) < 2)
