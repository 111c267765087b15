"""Qubit-qutrit attack on quantum private query and a CHSH-like dimension test."""

from .chsh_game import (
    ConditionalTable,
    GameStrategy,
    closed_form_win,
    exact_table,
    exact_win_probability,
    play_round,
    win_predicate,
)
from .dim_certifier import (
    CertifierConfig,
    EncodingPolicy,
    Verdict,
    required_sample_size,
    run_certification,
)
from .quantum_core import (
    NO_DETECT,
    BipartiteState,
    MeasurementBasis,
    StateEnsemble,
    born_probability,
    joint_distribution,
    tensor,
)
from .state_families import (
    E_HMINUS,
    E_VMINUS,
    FamilyParams,
    Kind,
    diff_subspace_state,
    embed,
    game_basis,
    general_qutrit_state,
    product_ensemble,
    same_subspace_state,
)

__version__ = "0.1.0"
