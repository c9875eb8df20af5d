"""Energy-constrained Leggett-Garg K3 toolkit for a dephasing qubit.

Simulates the three-term LG quantity K3 = C12 + C23 - C13 under unitary
and Markovian-dephasing dynamics, tracks the energy cost of the sequential
measurement protocol, and maximizes K3 subject to a fixed energy cost.
"""

from .dynamics import (
    DephasingModel,
    Propagator,
    build_liouvillian,
    dephasing_z_closed_form,
    propagate,
    propagator,
    unitary_propagator,
)
from .optimize import (
    ConstrainedSearch,
    ConstraintSpec,
    FeasibilityResult,
    MaxLineReport,
    OptimizationResult,
    SearchConfig,
    feasible_bounds_pure,
    feasible_numeric,
    k3_opt,
    max_violation_delta,
    verify_theorem_max_line,
)
from .protocol import (
    CorrelationRecord,
    LGOutcome,
    delta_e_closed_forms,
    k3_closed_form_dephasing_z,
    k3_closed_form_noiseless,
    k3_dephasing_z_engine_convention,
    lg_run,
    two_time_correlation,
)
from .qubit import (
    DomainError,
    MeasurementResult,
    MeasurementSetting,
    ProjectorPair,
    energy,
    measure,
    mixed_state,
    observable,
    pure_state,
    to_bloch,
)
from .sweep import (
    GridRange,
    SweepCell,
    SweepSpec,
    export_csv,
    export_json,
    read_csv,
    read_json,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ConstrainedSearch",
    "ConstraintSpec",
    "CorrelationRecord",
    "DephasingModel",
    "DomainError",
    "FeasibilityResult",
    "GridRange",
    "LGOutcome",
    "MaxLineReport",
    "MeasurementResult",
    "MeasurementSetting",
    "OptimizationResult",
    "ProjectorPair",
    "Propagator",
    "SearchConfig",
    "SweepCell",
    "SweepSpec",
    "build_liouvillian",
    "delta_e_closed_forms",
    "dephasing_z_closed_form",
    "energy",
    "export_csv",
    "export_json",
    "feasible_bounds_pure",
    "feasible_numeric",
    "k3_closed_form_dephasing_z",
    "k3_closed_form_noiseless",
    "k3_dephasing_z_engine_convention",
    "k3_opt",
    "lg_run",
    "max_violation_delta",
    "measure",
    "mixed_state",
    "observable",
    "propagate",
    "propagator",
    "pure_state",
    "read_csv",
    "read_json",
    "run_sweep",
    "to_bloch",
    "two_time_correlation",
    "unitary_propagator",
    "verify_theorem_max_line",
]
