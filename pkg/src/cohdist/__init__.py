"""One-shot coherence distillation toolkit.

Monotone family and distillation programs with every headline
quantity computable by at least two independent routes.
"""

from .distill import (
    DistillationReport,
    HypothesisTestResult,
    asymptotic_rate_scan,
    fidelity_distill,
    hypothesis_test_relent,
    min_hypothesis_over_diagonal,
    min_hypothesis_pure,
    one_shot_distillable,
)
from .errors import (
    CoherenceError,
    ConvergenceFailure,
    DimensionMismatch,
    InvalidDistribution,
    InvalidStateFile,
    InvalidWitness,
    ResourceLimit,
    SolverFailure,
    UnsupportedCombination,
)
from .linalg import DensityMatrix, StateVector, as_density, max_coherent_state
from .monotones import (
    MonotoneResult,
    modified_trace_distance,
    relative_entropy_of_coherence,
    robustness,
    theta,
    theta_hat,
    trace_distance_of_coherence,
)
from .purestate import (
    MNormResult,
    fidelity_pure,
    m_distillation_norm,
    m_norm_dual_check,
    rate_from_probs,
    theta_pure,
    zero_error_distillable_pure,
)
from .stateio import load_state_file, save_state_file
from .transforms import (
    ChoiChannel,
    MajorizationPlan,
    apply_choi,
    certify_dio,
    majorizes,
    optimal_distillation_channel,
    sio_pure_protocol,
)

__version__ = "0.1.0"

__all__ = [
    "ChoiChannel",
    "CoherenceError",
    "ConvergenceFailure",
    "DensityMatrix",
    "DimensionMismatch",
    "DistillationReport",
    "HypothesisTestResult",
    "InvalidDistribution",
    "InvalidStateFile",
    "InvalidWitness",
    "MNormResult",
    "MajorizationPlan",
    "MonotoneResult",
    "ResourceLimit",
    "SolverFailure",
    "StateVector",
    "UnsupportedCombination",
    "apply_choi",
    "as_density",
    "asymptotic_rate_scan",
    "certify_dio",
    "fidelity_distill",
    "fidelity_pure",
    "hypothesis_test_relent",
    "load_state_file",
    "m_distillation_norm",
    "m_norm_dual_check",
    "majorizes",
    "max_coherent_state",
    "min_hypothesis_over_diagonal",
    "min_hypothesis_pure",
    "modified_trace_distance",
    "one_shot_distillable",
    "optimal_distillation_channel",
    "rate_from_probs",
    "relative_entropy_of_coherence",
    "robustness",
    "save_state_file",
    "sio_pure_protocol",
    "theta",
    "theta_hat",
    "theta_pure",
    "trace_distance_of_coherence",
    "zero_error_distillable_pure",
]
