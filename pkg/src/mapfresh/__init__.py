"""Reward optimization and age-of-information tools for crowd-sensed maps.

A fleet of vehicles can keep a segmented map fresh by uploading sensor data
as they drive. The map operator announces one uniform reward per participant
(negative values are charges); each vehicle weighs the reward plus its own
usage value of a fresher map against its sensing cost. This package solves
the resulting two-stage game exactly, simulates the age process to validate
the closed-form model, and ships seeded experiment harnesses that trace how
the optimal reward and participation respond to fleet size.
"""

from .aoi import (
    AoiReport,
    SimResult,
    aoi_report,
    expected_segment_aoi,
    map_aoi,
    segment_update_rate,
    simulate_aoi,
    trajectory_aoi,
)
from .equilibrium import (
    CapacityError,
    EquilibriumOutcome,
    enumerate_equilibria,
    is_nash,
    largest_equilibrium,
    selected_equilibrium,
    smallest_equilibrium,
)
from .experiments import (
    FamilyConfig,
    MonotoneVerdict,
    SweepRecord,
    check_monotone,
    default_families,
    default_family,
    observation_report,
    population_sweep,
    records_csv,
)
from .payoff import (
    PayoffBreakdown,
    company_payoff,
    marginal_cost,
    usage_utility,
    vehicle_payoff,
)
from .rng import SplitMix64, substream
from .scenario import (
    GenConfig,
    ParseError,
    RoadMap,
    Scenario,
    Segment,
    UtilityFamily,
    ValidationError,
    Vehicle,
    Visit,
    generate_scenario,
    load_scenario,
    parse_scenario,
    save_scenario,
    scenario_json,
    validate_scenario,
)
from .stackelberg import (
    CandidateRecord,
    StackelbergSolution,
    optimal_reward_grid,
    optimal_reward_sweep,
    reward_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "AoiReport",
    "CandidateRecord",
    "CapacityError",
    "EquilibriumOutcome",
    "FamilyConfig",
    "GenConfig",
    "MonotoneVerdict",
    "ParseError",
    "PayoffBreakdown",
    "RoadMap",
    "Scenario",
    "Segment",
    "SimResult",
    "SplitMix64",
    "StackelbergSolution",
    "SweepRecord",
    "UtilityFamily",
    "ValidationError",
    "Vehicle",
    "Visit",
    "aoi_report",
    "check_monotone",
    "company_payoff",
    "default_families",
    "default_family",
    "enumerate_equilibria",
    "expected_segment_aoi",
    "generate_scenario",
    "is_nash",
    "largest_equilibrium",
    "load_scenario",
    "map_aoi",
    "marginal_cost",
    "observation_report",
    "optimal_reward_grid",
    "optimal_reward_sweep",
    "parse_scenario",
    "population_sweep",
    "records_csv",
    "reward_bounds",
    "save_scenario",
    "scenario_json",
    "segment_update_rate",
    "selected_equilibrium",
    "simulate_aoi",
    "smallest_equilibrium",
    "substream",
    "trajectory_aoi",
    "usage_utility",
    "validate_scenario",
    "vehicle_payoff",
]
