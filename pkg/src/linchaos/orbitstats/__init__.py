from .certificate import (
    CLAIMS,
    Certificate,
    Rejection,
    Verification,
    canonical_dumps,
    first_mismatch,
    verify_certificate,
)
from .density import DensityReport, IndexSet, density, powers_of_two
from .detectors import (
    DETECTORS,
    dirregular_pair_test,
    dirregular_test,
    distributional_chaos_test,
    distributional_count,
    distributional_function,
    irregular_test,
    liyorke_pair_test,
    rerun,
    scrambled_line_check,
    scrambled_line_test,
)

__all__ = [
    "CLAIMS",
    "Certificate",
    "Rejection",
    "Verification",
    "canonical_dumps",
    "first_mismatch",
    "verify_certificate",
    "DensityReport",
    "IndexSet",
    "density",
    "powers_of_two",
    "DETECTORS",
    "dirregular_pair_test",
    "dirregular_test",
    "distributional_chaos_test",
    "distributional_count",
    "distributional_function",
    "irregular_test",
    "liyorke_pair_test",
    "rerun",
    "scrambled_line_check",
    "scrambled_line_test",
]
