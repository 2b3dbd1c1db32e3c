from .consequences import (
    ConsistencyReport,
    SummabilityReport,
    SummabilityVerdict,
    series_summability_test,
    spectral_consistency_check,
)
from .suprema import SupremumVerdict, compute_Mv, compute_Mw, max_product_scan
from .witnesses import (
    CriterionRejection,
    DCCReport,
    DecayEvidence,
    LYCCEvidence,
    SDCCWitness,
    count_at_least,
    dcc_witness_check,
    decay_evidence,
    default_pool,
    lycc_evidence,
    sdcc_witness_search,
    span_samples,
)

__all__ = [
    "ConsistencyReport",
    "SummabilityReport",
    "SummabilityVerdict",
    "series_summability_test",
    "spectral_consistency_check",
    "SupremumVerdict",
    "compute_Mv",
    "compute_Mw",
    "max_product_scan",
    "CriterionRejection",
    "DCCReport",
    "DecayEvidence",
    "LYCCEvidence",
    "SDCCWitness",
    "count_at_least",
    "dcc_witness_check",
    "decay_evidence",
    "default_pool",
    "lycc_evidence",
    "sdcc_witness_search",
    "span_samples",
]
