"""Sparse support recovery from phase-only corrupted measurements.

The package splits into a measurement model (:mod:`.model`), an in-house ADMM
engine for the two L1 programs (:mod:`.admm`), the three recovery methods and
support utilities (:mod:`.recovery`), scikit-learn style estimators
(:mod:`.estimators`), a seeded Monte Carlo harness (:mod:`.experiments`),
result writers (:mod:`.output`) and a CLI (:mod:`.cli`).
"""

__version__ = "0.1.0"

from .admm import (FEAS_TOL, SolveReport, SolveStatus, SolverOptions,
                   embed_complex, group_soft_threshold, l1_objective,
                   soft_threshold, solve_equality_l1, solve_inequality_l1)
from .estimators import (PhaseOnlyBasisPursuit, PhaseOnlySupportRecovery,
                         StandardBasisPursuit)
from .experiments import (SpsrEstimate, SweepResult, TrialConfig, TrialResult,
                          compute_spsr, mix_seed, run_trial, sweep_k, sweep_m)
from .model import (Dictionary, MeasurementSet, SensingMatrix, SparseSignal,
                    build_measurement_set, corrupt, estimate_rip_deviation,
                    exact_rip_deviation, generate_sensing_matrix,
                    generate_sparse_signal, measure, sample_corruption, split)
from .recovery import (MethodId, Support, extract_support, run_method,
                       solve_pobp, solve_possr, solve_sbp, supports_equal)
from .validation import UndefinedPhaseError

__all__ = [
    "FEAS_TOL",
    "Dictionary",
    "MeasurementSet",
    "MethodId",
    "PhaseOnlyBasisPursuit",
    "PhaseOnlySupportRecovery",
    "SensingMatrix",
    "SolveReport",
    "SolveStatus",
    "SolverOptions",
    "SparseSignal",
    "SpsrEstimate",
    "StandardBasisPursuit",
    "Support",
    "SweepResult",
    "TrialConfig",
    "TrialResult",
    "UndefinedPhaseError",
    "build_measurement_set",
    "compute_spsr",
    "corrupt",
    "embed_complex",
    "estimate_rip_deviation",
    "exact_rip_deviation",
    "extract_support",
    "generate_sensing_matrix",
    "generate_sparse_signal",
    "group_soft_threshold",
    "l1_objective",
    "measure",
    "mix_seed",
    "run_method",
    "run_trial",
    "sample_corruption",
    "soft_threshold",
    "solve_equality_l1",
    "solve_inequality_l1",
    "solve_pobp",
    "solve_possr",
    "solve_sbp",
    "split",
    "supports_equal",
    "sweep_k",
    "sweep_m",
    "__version__",
]
