"""Simulation and exact verification of randomized search heuristics on noisy
pseudo-Boolean benchmarks."""

__version__ = "0.1.0"

from .benchmarks import (
    BenchmarkSpec,
    eval_benchmark,
    is_weakly_monotonic,
    needle,
    optimum,
    parse_benchmark,
)
from .core import BitString, RngStream, derive_stream, hamming_distance
from .harness import ExperimentConfig, ResultSet, run_experiment
from .heuristics import (
    AlgorithmSpec,
    HittingRecord,
    PopulationState,
    Schedule,
    TrajectoryState,
    fp_select,
    run_until_hit,
    step_one_comma_lambda,
    step_simple_ga,
    step_single_trajectory,
)
from .noise import NO_NOISE, AdditiveDist, AdversaryPolicy, NoiseSpec, noisy_eval
from .oracle import (
    TransitionMatrix,
    expected_hitting_time,
    full_chain,
    lumped_chain,
    path_probability,
    verify_drift_bound,
)
from .stats import (
    DominanceVerdict,
    DriftEstimate,
    check_dominated_by_scaled_geom,
    estimate_drift,
    geom_tail,
    mean_ci,
)

__all__ = [
    "AdditiveDist",
    "AdversaryPolicy",
    "AlgorithmSpec",
    "BenchmarkSpec",
    "BitString",
    "DominanceVerdict",
    "DriftEstimate",
    "ExperimentConfig",
    "HittingRecord",
    "NO_NOISE",
    "NoiseSpec",
    "PopulationState",
    "ResultSet",
    "RngStream",
    "Schedule",
    "TrajectoryState",
    "TransitionMatrix",
    "check_dominated_by_scaled_geom",
    "derive_stream",
    "estimate_drift",
    "eval_benchmark",
    "expected_hitting_time",
    "fp_select",
    "full_chain",
    "geom_tail",
    "hamming_distance",
    "is_weakly_monotonic",
    "lumped_chain",
    "mean_ci",
    "needle",
    "noisy_eval",
    "optimum",
    "parse_benchmark",
    "path_probability",
    "run_experiment",
    "run_until_hit",
    "step_one_comma_lambda",
    "step_simple_ga",
    "step_single_trajectory",
    "verify_drift_bound",
]
