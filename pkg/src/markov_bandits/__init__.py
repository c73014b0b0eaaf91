"""Rested and restless multi-play Markovian bandits.

UCB-M and RCA-M index policies, stationary analysis of the arm chains,
closed-form regret bounds and a seeded Monte-Carlo harness.
"""

from .arms import ArmProcess, Mode
from .bounds import (
    BETA,
    BoundConstants,
    LogBound,
    bound_constants,
    lemma_play_count_bound,
    min_exploration_constant,
    theorem1_bound,
    theorem2_bound,
)
from .harness import (
    ExperimentConfig,
    MonteCarloResult,
    RegretTrace,
    monte_carlo,
    run_once,
    run_recorded,
    weak_regret,
)
from .kernels import BACKEND
from .markov import (
    ChainAnalysis,
    ChainSpec,
    check_condition1,
    eigenvalue_gap,
    hitting_times,
    mean_reward,
    multiplicative_symmetrization,
    sample_next,
    stationary_distribution,
)
from .policies import (
    PolicyDecision,
    RcaM,
    UcbM,
    adaptive_gamma,
    oracle_best_m,
    rcam_index,
    ucbm_index,
    ucbm_initial_schedule,
)
from .presets import preset

__version__ = "0.1.0"
