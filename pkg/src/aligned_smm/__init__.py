"""Two-sided secure distributed matrix multiplication with aligned secret sharing."""

from .codec import (
    Answer,
    ExponentMap,
    Keys,
    Partition,
    SchemeParams,
    SharePair,
    build_exponent_map,
    decode,
    encode,
    recovery_threshold,
    server_compute,
)
from .errors import *  # noqa: F401,F403
from .ffield import (
    DEFAULT_PRIME,
    FieldElement,
    FieldMatrix,
    FieldPrime,
    field_arith,
    interpolate,
    mat_mul,
)
from .partition import (
    OptimizationResult,
    RationalRate,
    breakpoint_estimate,
    exhaustive_rate_opt,
    exhaustive_threshold_opt,
    gap_sweep,
    is_strongly_feasible,
    rate_sweep,
    theorem1_estimate,
    theorem2_estimate,
)
from .security import CollusionReport, leakage_oracle, masking_matrix_check
from .simulator import SimReport, StragglerConfig, run_simulation, threshold_experiment

__version__ = "0.1.0"
