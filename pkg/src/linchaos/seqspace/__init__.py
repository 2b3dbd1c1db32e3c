from .logreal import (
    LOG2,
    NEG_INF,
    ONE,
    ZERO,
    LogReal,
    cancellation,
    cancellation_threshold,
    from_decimal,
    logsumexp,
    to_decimal,
)
from .vectors import SpaceSpec, SparseVector, axpy, linear_combination, norm, weight_at, weight_product
from .weights import (
    BlockRunLengthTail,
    ConstantTail,
    GeometricTail,
    PowerLawTail,
    RunsTail,
    Tail,
    WeightSequence,
)

__all__ = [
    "LOG2",
    "NEG_INF",
    "ONE",
    "ZERO",
    "LogReal",
    "cancellation",
    "cancellation_threshold",
    "from_decimal",
    "logsumexp",
    "to_decimal",
    "SpaceSpec",
    "SparseVector",
    "axpy",
    "linear_combination",
    "norm",
    "weight_at",
    "weight_product",
    "BlockRunLengthTail",
    "ConstantTail",
    "GeometricTail",
    "PowerLawTail",
    "RunsTail",
    "Tail",
    "WeightSequence",
]
