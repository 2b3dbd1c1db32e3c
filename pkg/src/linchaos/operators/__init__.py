from .apply import apply, apply_power, log_binom, shift_power
from .norms import (
    PowerNorm,
    ScalarPlusNormUnsupported,
    SpectralInterval,
    power_norm,
    power_norm_bracket,
    spectral_radius_estimate,
)
from .orbit import DEFAULT_BUDGET, OrbitRecord, orbit, shift_lognorm_at
from .spec import (
    KINDS,
    SHIFT_KINDS,
    OperatorSpec,
    backward_shift,
    finite_matrix,
    scalar_plus,
    weighted_backward_shift,
    weighted_forward_shift,
)

__all__ = [
    "apply",
    "apply_power",
    "log_binom",
    "shift_power",
    "PowerNorm",
    "ScalarPlusNormUnsupported",
    "SpectralInterval",
    "power_norm",
    "power_norm_bracket",
    "spectral_radius_estimate",
    "DEFAULT_BUDGET",
    "OrbitRecord",
    "orbit",
    "shift_lognorm_at",
    "KINDS",
    "SHIFT_KINDS",
    "OperatorSpec",
    "backward_shift",
    "finite_matrix",
    "scalar_plus",
    "weighted_backward_shift",
    "weighted_forward_shift",
]
