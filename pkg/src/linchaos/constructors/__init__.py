from .dcc import (
    ManifoldReport,
    MaskFamily,
    dense_irregular_manifold,
    dirregular_from_dcc,
    doubling_shift_dcc_inputs,
    fast_growth_N,
    sign_combinations,
)
from .designs import (
    DesignCheck,
    block_crests,
    design_di_forward_weights,
    oscillating_block_weights,
    verify_di_design,
)
from .existence import (
    BinomialNorms,
    ExistenceReport,
    StageReport,
    alpha_range,
    beta_formula,
    existence_operator,
    existence_T,
    existence_weights,
    stage_N,
)
from .irregular import (
    OrbitOracle,
    backward_shift_irregular_seed,
    greedy_index_set,
    irregular_from_bounded_oscillation,
    irregular_from_lycc,
    lognorm_at,
    lycc_sequences,
)
from .plan import Check, Construction, SeriesPlan, SeriesTerm

__all__ = [
    "ManifoldReport",
    "MaskFamily",
    "dense_irregular_manifold",
    "dirregular_from_dcc",
    "doubling_shift_dcc_inputs",
    "fast_growth_N",
    "sign_combinations",
    "DesignCheck",
    "block_crests",
    "design_di_forward_weights",
    "oscillating_block_weights",
    "verify_di_design",
    "BinomialNorms",
    "ExistenceReport",
    "StageReport",
    "alpha_range",
    "beta_formula",
    "existence_operator",
    "existence_T",
    "existence_weights",
    "stage_N",
    "OrbitOracle",
    "backward_shift_irregular_seed",
    "greedy_index_set",
    "irregular_from_bounded_oscillation",
    "irregular_from_lycc",
    "lognorm_at",
    "lycc_sequences",
    "Check",
    "Construction",
    "SeriesPlan",
    "SeriesTerm",
]
