"""Evolutionary packet-forwarding game toolkit.

Reputation-based forwarding strategies (FF, FD, DD) in unreliable ad hoc
networks: closed-form reputation and payoff analysis, replicator dynamics in
well-mixed and networked populations, cooperation thresholds, basin maps, and
a seeded agent-based co-evolution simulator.
"""

from ._core import (
    ConfigError,
    GameParams,
    LinkBreakMatrix,
    NumericalError,
    ReputationState,
    __version__,
    action_of,
    action_payoff_matrix,
    compute_basins_ss,
    compute_basins_uss,
    cooperation_frequency,
    expected_payoffs_uss,
    fermi_probability,
    full_cooperation_baseline,
    integrate_ss,
    integrate_uss,
    link_weighted_payoff_matrix,
    reputation_recursion_step,
    reputation_update,
    run_replicates,
    ss_cess_thresholds,
    stable_reputation,
    stationary_link_distribution,
    strategy_payoff_matrix,
    uss_cess_thresholds,
    vertex_stability_ss,
    vertex_stability_uss,
)

__all__ = [
    "ConfigError",
    "GameParams",
    "LinkBreakMatrix",
    "NumericalError",
    "ReputationState",
    "__version__",
    "action_of",
    "action_payoff_matrix",
    "compute_basins_ss",
    "compute_basins_uss",
    "cooperation_frequency",
    "expected_payoffs_uss",
    "fermi_probability",
    "full_cooperation_baseline",
    "integrate_ss",
    "integrate_uss",
    "link_weighted_payoff_matrix",
    "reputation_recursion_step",
    "reputation_update",
    "run_replicates",
    "ss_cess_thresholds",
    "stable_reputation",
    "stationary_link_distribution",
    "strategy_payoff_matrix",
    "uss_cess_thresholds",
    "vertex_stability_ss",
    "vertex_stability_uss",
]
