"""Factored-observation stochastic games.

Tabular model definition and validation, serialization of simultaneous
moves, unrolling into tree form with information and public partitions,
timeability analysis and padding, counterfactual regret minimization,
public-tree decomposition, and sequence-form linear programming.
"""

from . import errors
from .cfr import (best_response, cfr_run, check_observable_rewards, exploitability,
                  expected_values, game_value, reach_probabilities, regret_matching,
                  uniform_profile)
from .decomposition import (PublicBeliefState, Range, Trunk, build_subgame, cfr_d,
                            complete_profile, public_subtree, range_at, subgame_histories,
                            trivial_pbs)
from .games import (Fixture, catalog, kuhn_poker, kuhn_poker_chance_variant,
                    matching_pennies, nontimeable_fixture, padding_chain, random_fosg,
                    random_timeable_efg, two_augmentations)
from .model import (FactoredObservation, GameSpec, expected_utilities, is_serial,
                    merge_chance, sample_chance_action, serialize, step, validate)
from .sequence_form import (RealizationPlan, SequenceLP, build_sequence_lp,
                            constraint_matrices, enumerate_sequences, payoff_matrix,
                            plan_from_policy, realization_to_behavioral, solve_zero_sum_lp)
from .timing import Timing, find_exact_timing, normalize_labels, pad_to_1_timeable, \
    validate_timing, verify_witness
from .unroll import (ClassicalEFG, ExtensiveFormRep, augment_classical,
                     check_perfect_recall, forget_factorization, forget_nonacting,
                     has_thick_public_sets, lift_to_fosg, unroll)

__version__ = "0.1.0"
