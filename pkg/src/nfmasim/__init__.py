"""Near-field movable-antenna multiuser downlink simulator.

The package models spherical-wave Rician channels as functions of
continuously movable antenna positions, solves the SINR-constrained
transmit-power-minimization beamforming subproblem, and searches antenna
positions with a two-loop pruning particle swarm. See README.md for a
tour; ``demos/`` for narrative scripts; ``nfmasim --help`` for the CLI.
"""

from .beamforming import (BeamformingSolution, LinkBudget, achievable_rate,
                          check_rate_constraints, dbm_to_watts,
                          minimize_power, minimize_power_socp, sinr,
                          watts_to_dbm)
from .channel import (CarrierConfig, ChannelDrop, assemble_channel,
                      channel_matrix, free_space_amplitude, los_component,
                      nlos_component, steering_vector)
from .geometry import (RegionBox, SystemLayout, count_spacing_violations,
                       local_to_global, min_pairwise_distance,
                       project_into_box, random_rotation)
from .harness import (ExperimentResult, Placement, Scenario, ScenarioError,
                      drop_scenario, parse_scenario_file, run_scheme, sweep)
from .optimizer import (FitnessContext, FitnessEval, RunResult, SwarmConfig,
                        inertia_weight, make_power_fitness,
                        prune_neighborhood, residual_count, run_swarm)

__version__ = "0.1.0"

__all__ = [
    "BeamformingSolution", "LinkBudget", "achievable_rate",
    "check_rate_constraints", "dbm_to_watts", "minimize_power",
    "minimize_power_socp", "sinr", "watts_to_dbm",
    "CarrierConfig", "ChannelDrop", "assemble_channel", "channel_matrix",
    "free_space_amplitude", "los_component", "nlos_component",
    "steering_vector",
    "RegionBox", "SystemLayout", "count_spacing_violations",
    "local_to_global", "min_pairwise_distance", "project_into_box",
    "random_rotation",
    "ExperimentResult", "Placement", "Scenario", "ScenarioError",
    "drop_scenario", "parse_scenario_file", "run_scheme", "sweep",
    "FitnessContext", "FitnessEval", "RunResult", "SwarmConfig",
    "inertia_weight", "make_power_fitness", "prune_neighborhood",
    "residual_count", "run_swarm",
    "__version__",
]
