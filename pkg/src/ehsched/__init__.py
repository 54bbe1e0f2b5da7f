"""Transmission scheduling for an energy-harvesting transmitter/receiver pair."""

__version__ = "0.1.0"

from .errors import (
    SchedulingError,
    InsufficientHarvestError,
    PolicyStructureError,
    NumericalFailureError,
    InternalInvariantError,
    OfflineRestrictionError,
)
from .rates import RateFunction, power_for_efficiency, duration_for_bits, check_rate_axioms
from .model import (
    HarvestTrace,
    ProblemInstance,
    PowerSegment,
    TransmissionPolicy,
    FeasibilityReport,
    energy_before,
    energy_through,
    on_time_before,
    on_time_through,
    consumed_energy,
    transmitted_bits,
    on_time_used,
    check_feasibility,
)
from .baseline import max_bits_by_deadline, min_finish_time
from .offline import (
    InitResult,
    PullBackState,
    StructureReport,
    OfflineSolution,
    init_policy,
    pull_back_step,
    finalize_schedule,
    solve_offline,
    verify_structure,
)
from .online import (
    OnlineResult,
    BoundResult,
    RatioResult,
    online_start_time,
    run_online,
    offline_lower_bound,
    competitive_ratio,
)
from .lab import (
    TraceSpec,
    ExperimentConfig,
    ExperimentRecord,
    ExperimentResult,
    generate_instance,
    oracle_min_finish,
    default_grid_step,
    run_experiment,
    write_csv,
)

__all__ = [
    "SchedulingError",
    "InsufficientHarvestError",
    "PolicyStructureError",
    "NumericalFailureError",
    "InternalInvariantError",
    "OfflineRestrictionError",
    "RateFunction",
    "power_for_efficiency",
    "duration_for_bits",
    "check_rate_axioms",
    "HarvestTrace",
    "ProblemInstance",
    "PowerSegment",
    "TransmissionPolicy",
    "FeasibilityReport",
    "energy_before",
    "energy_through",
    "on_time_before",
    "on_time_through",
    "consumed_energy",
    "transmitted_bits",
    "on_time_used",
    "check_feasibility",
    "max_bits_by_deadline",
    "min_finish_time",
    "InitResult",
    "PullBackState",
    "StructureReport",
    "OfflineSolution",
    "init_policy",
    "pull_back_step",
    "finalize_schedule",
    "solve_offline",
    "verify_structure",
    "OnlineResult",
    "BoundResult",
    "RatioResult",
    "online_start_time",
    "run_online",
    "offline_lower_bound",
    "competitive_ratio",
    "TraceSpec",
    "ExperimentConfig",
    "ExperimentRecord",
    "ExperimentResult",
    "generate_instance",
    "oracle_min_finish",
    "default_grid_step",
    "run_experiment",
    "write_csv",
]
