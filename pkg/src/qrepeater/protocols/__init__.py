"""Swapping protocols: measurements, single-node theory and chain reductions."""

from .chain import (
    ChainScenario,
    EndNoiseReduction,
    MidNoiseReduction,
    ScenarioError,
    SegmentSpec,
    Window,
    average_ofef_two_node,
    min_concurrence_at,
    reduce_chain_end_noise,
    position_feasible,
    reduce_chain_mid_noise,
    saved_resource_at_position,
    saved_resource_of,
    two_node_feasibility,
    two_noisy_window,
)
from .measurement import (
    TWO_NODE_SPOT_LABELS,
    NoisyBellPovm,
    Outcome,
    OutcomeEnsemble,
    PvmBasis,
    measure_node,
    noisy_bell_povm,
    post_states_closed_form,
    pvm_basis,
    single_node_ensemble,
    two_node_closed_form,
    two_node_engine,
)
from .single_node import (
    FamilyParams,
    FeasibilityReport,
    NotFamilyError,
    alpha_from_concurrence,
    average_ofef_single_node,
    family_params_extract,
    feasibility_single_node,
    lemma1_bound_check,
    rpbes_combine,
    rpbes_fold,
    theorem_fidelity,
)

__all__ = [
    "ChainScenario",
    "EndNoiseReduction",
    "FamilyParams",
    "FeasibilityReport",
    "MidNoiseReduction",
    "NoisyBellPovm",
    "NotFamilyError",
    "Outcome",
    "OutcomeEnsemble",
    "PvmBasis",
    "ScenarioError",
    "SegmentSpec",
    "TWO_NODE_SPOT_LABELS",
    "Window",
    "alpha_from_concurrence",
    "average_ofef_single_node",
    "average_ofef_two_node",
    "family_params_extract",
    "feasibility_single_node",
    "lemma1_bound_check",
    "measure_node",
    "min_concurrence_at",
    "noisy_bell_povm",
    "position_feasible",
    "post_states_closed_form",
    "pvm_basis",
    "reduce_chain_end_noise",
    "reduce_chain_mid_noise",
    "rpbes_combine",
    "rpbes_fold",
    "saved_resource_at_position",
    "saved_resource_of",
    "single_node_ensemble",
    "theorem_fidelity",
    "two_node_closed_form",
    "two_node_engine",
    "two_node_feasibility",
    "two_noisy_window",
]
