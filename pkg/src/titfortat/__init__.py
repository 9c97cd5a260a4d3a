"""Tit-for-tat dynamics in production markets with symmetric values."""

from .analysis import (
    TIE_TOLERANCE,
    BoundConstants,
    LimitProfile,
    Phase,
    PhaseEntry,
    PhaseReport,
    SweepRow,
    bound_constants,
    check_amount_bounds,
    check_conserved_product,
    check_corollary_envelope,
    check_optimal_ratio_invariance,
    check_potential_law,
    check_two_step_identity,
    classify,
    fraction_limit_profile,
    growth_exponent,
    optimal_set,
    potential,
    sweep,
)
from .dynamics import (
    Economy,
    EconomyError,
    FlowMatrix,
    MarketState,
    Trajectory,
    amount_log,
    flows,
    initial_state,
    new_economy,
    run,
    step,
)
from .oracle import ExactTrajectory, RationalEconomy, compare, run_exact
from .scenario import (
    Scenario,
    ScenarioError,
    dump_scenario,
    generate_random,
    load_scenario,
    save_trajectory_csv,
)

__version__ = "0.1.0"
