"""Multiplexed heralded single-photon source toolkit.

Models a bank of pulsed SPDC pair sources whose heralded photons are
funnelled through a by-passable binary delay register into a periodic
m-photon output train, with the register span behind the train acting as
cross-cycle storage.  Provides a cycle-accurate Monte Carlo engine, an
exact Markov-chain solution for the idealized bank, delay reachability
analysis and an operating-point optimizer, plus a CLI wrapping all of it.
"""

from .emission import (
    EmissionBatch,
    HeraldProbabilities,
    HeraldReport,
    herald,
    herald_probabilities,
    pair_pmf,
    sample_cycle_emissions,
)
from .errors import ConvergenceError, ParameterError
from .oracle import (
    ChainSpec,
    OracleRates,
    herald_count_distribution,
    optimized_power,
    stationary_distribution,
    stationary_rates,
    transition_matrix,
)
from .register import (
    DelayPath,
    DelaySet,
    RegisterTopology,
    accessible_delays,
    enumerate_delay_paths,
    step_count_bounds,
    verify_monotone_assignment,
)
from .scheduler import (
    CyclePlan,
    SlotFill,
    StorageState,
    plan_cycle,
    plan_cycle_optimal,
    storage_capacity,
)
from .simulator import (
    BoundaryMode,
    FeedbackMode,
    FeedbackPolicy,
    SimConfig,
    SimMetrics,
    apply_feedback,
    derive_point_seed,
    run_cycle,
    run_simulation,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryMode",
    "ChainSpec",
    "ConvergenceError",
    "CyclePlan",
    "DelayPath",
    "DelaySet",
    "EmissionBatch",
    "FeedbackMode",
    "FeedbackPolicy",
    "HeraldProbabilities",
    "HeraldReport",
    "OracleRates",
    "ParameterError",
    "RegisterTopology",
    "SimConfig",
    "SimMetrics",
    "SlotFill",
    "StorageState",
    "accessible_delays",
    "apply_feedback",
    "derive_point_seed",
    "enumerate_delay_paths",
    "herald",
    "herald_count_distribution",
    "herald_probabilities",
    "optimized_power",
    "pair_pmf",
    "plan_cycle",
    "plan_cycle_optimal",
    "run_cycle",
    "run_simulation",
    "sample_cycle_emissions",
    "stationary_distribution",
    "stationary_rates",
    "step_count_bounds",
    "storage_capacity",
    "transition_matrix",
    "verify_monotone_assignment",
]
