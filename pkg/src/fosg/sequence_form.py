"""Sequence-form representation and the zero-sum minimax linear program.

A player's sequences are their decision infostates paired with an action,
plus the empty sequence; realization plans assign each sequence the product
of the behavioural probabilities along it. The bilinear payoff form
x.T A y over plan pairs equals the expected utility of the first player,
which turns equilibrium computation into a linear program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Tuple

import numpy as np

from .cfr import PolicyProfile
from .errors import ImperfectRecall, InvalidPlan, NotZeroSum
from .simplex import solve_standard_form
from .unroll import CHANCE_ACTOR, ExtensiveFormRep, check_perfect_recall

EMPTY = ("∅",)


@dataclass
class SequenceSet:
    """Ordered sequences of one player: the empty sequence plus (infostate, action) pairs."""

    owner: int
    sequences: List[Hashable]            # index 0 is the empty sequence
    index: Dict[Hashable, int]
    parent: List[int]                    # parent sequence index, -1 for the empty sequence
    infoset_key: List[Optional[Hashable]]
    action: List[Optional[str]]
    infoset_rows: List[Tuple[Hashable, int, Tuple[int, ...]]]
    # (infostate key, parent sequence index, child sequence indices), canonical order

    def __len__(self) -> int:
        return len(self.sequences)


def _infoset_parent_sequences(rep: ExtensiveFormRep, player: int,
                              ) -> List[Tuple[Hashable, Tuple[int, ...], Hashable]]:
    """Acting infosets in canonical order with their parent (infostate, action)."""
    out = []
    for key, members in rep.acting_infosets(player).items():
        first = rep.nodes[members[0]]
        parent_seq: Hashable = EMPTY
        node = first
        while node.parent is not None:
            parent = rep.nodes[node.parent]
            if parent.actor == player:
                parent_seq = (rep.infostate_keys[player][parent.id], node.incoming_action)
                break
            node = parent
        out.append((key, members, parent_seq))
    return out


def enumerate_sequences(rep: ExtensiveFormRep, player: int) -> SequenceSet:
    """Build the sequence set of one player in parent-before-child order."""
    ok, witness = check_perfect_recall(rep)
    if not ok:
        raise ImperfectRecall(f"representation lacks perfect recall: {witness!r}")
    sequences: List[Hashable] = [EMPTY]
    index: Dict[Hashable, int] = {EMPTY: 0}
    parent: List[int] = [-1]
    infoset_key: List[Optional[Hashable]] = [None]
    action: List[Optional[str]] = [None]
    rows: List[Tuple[Hashable, int, Tuple[int, ...]]] = []
    for key, members, parent_seq in _infoset_parent_sequences(rep, player):
        parent_idx = index[parent_seq]
        children = []
        for a in rep.nodes[members[0]].actions:
            seq = (key, a)
            index[seq] = len(sequences)
            sequences.append(seq)
            parent.append(parent_idx)
            infoset_key.append(key)
            action.append(a)
            children.append(index[seq])
        rows.append((key, parent_idx, tuple(children)))
    return SequenceSet(owner=player, sequences=sequences, index=index, parent=parent,
                       infoset_key=infoset_key, action=action, infoset_rows=rows)


def terminal_sequences(rep: ExtensiveFormRep, seqs: SequenceSet,
                       ) -> Dict[int, int]:
    """Map each terminal node to the owner's last sequence on its path."""
    player = seqs.owner
    last: List[int] = [0] * len(rep.nodes)
    for node in rep.nodes:
        if node.parent is None:
            continue
        parent = rep.nodes[node.parent]
        if parent.actor == player:
            key = rep.infostate_keys[player][parent.id]
            last[node.id] = seqs.index[(key, node.incoming_action)]
        else:
            last[node.id] = last[parent.id]
    return {n.id: last[n.id] for n in rep.terminals()}


@dataclass
class SequenceLP:
    """Payoff matrix over sequence pairs plus both realization-plan systems."""

    row_sequences: SequenceSet
    col_sequences: SequenceSet
    payoff: np.ndarray                  # rows: player 1 sequences, cols: player 2
    e_matrix: np.ndarray
    e_vector: np.ndarray
    f_matrix: np.ndarray
    f_vector: np.ndarray


def payoff_matrix(rep: ExtensiveFormRep) -> np.ndarray:
    """A[s, t] sums chance reach times player 1's utility over terminals with those sequences."""
    if rep.num_players != 2:
        raise NotZeroSum("the sequence-form payoff matrix requires two players")
    seqs1 = enumerate_sequences(rep, 1)
    seqs2 = enumerate_sequences(rep, 2)
    return _payoff_matrix(rep, seqs1, seqs2)


def _payoff_matrix(rep: ExtensiveFormRep, seqs1: SequenceSet, seqs2: SequenceSet) -> np.ndarray:
    b1 = terminal_sequences(rep, seqs1)
    b2 = terminal_sequences(rep, seqs2)
    chance = [1.0] * len(rep.nodes)
    for node in rep.nodes:
        if node.parent is None:
            continue
        parent = rep.nodes[node.parent]
        if parent.actor == CHANCE_ACTOR:
            chance[node.id] = chance[parent.id] * parent.chance_dist[node.incoming_action]
        else:
            chance[node.id] = chance[parent.id]
    a = np.zeros((len(seqs1), len(seqs2)))
    for node in rep.terminals():
        a[b1[node.id], b2[node.id]] += chance[node.id] * node.cumulative_reward[0]
    return a


def constraint_matrices(rep: ExtensiveFormRep, player: int) -> Tuple[np.ndarray, np.ndarray]:
    """Realization-plan constraints as (matrix, vector): row 0 pins the empty sequence."""
    seqs = enumerate_sequences(rep, player)
    return _constraint_matrices(seqs)


def _constraint_matrices(seqs: SequenceSet) -> Tuple[np.ndarray, np.ndarray]:
    rows = 1 + len(seqs.infoset_rows)
    e = np.zeros((rows, len(seqs)))
    e[0, 0] = 1.0
    for r, (_key, parent_idx, children) in enumerate(seqs.infoset_rows, start=1):
        e[r, parent_idx] = -1.0
        for child in children:
            e[r, child] = 1.0
    vec = np.zeros(rows)
    vec[0] = 1.0
    return e, vec


def build_sequence_lp(rep: ExtensiveFormRep) -> SequenceLP:
    if rep.num_players != 2:
        raise NotZeroSum("the sequence-form program requires two players")
    seqs1 = enumerate_sequences(rep, 1)
    seqs2 = enumerate_sequences(rep, 2)
    e_mat, e_vec = _constraint_matrices(seqs1)
    f_mat, f_vec = _constraint_matrices(seqs2)
    return SequenceLP(row_sequences=seqs1, col_sequences=seqs2,
                      payoff=_payoff_matrix(rep, seqs1, seqs2),
                      e_matrix=e_mat, e_vector=e_vec,
                      f_matrix=f_mat, f_vector=f_vec)


@dataclass
class LPSolution:
    game_value: float
    row_plan: np.ndarray                # maximizer's plan, recovered from the duals
    col_plan: np.ndarray                # minimizer's plan (the primal variable)
    u_values: np.ndarray
    pivots: List[Tuple[int, int]] = field(default_factory=list)


def solve_zero_sum_lp(lp: SequenceLP) -> LPSolution:
    """Solve min e.u over Fy = f, E.T u - A y >= 0, y >= 0.

    Standard-form transcription, with block structure:

        variables: [u+ (k)] [u- (k)] [y (n2)] [slack s (n1)]
        rows:      F y = f                      (1 + infosets of player 2)
                   E.T u+ - E.T u- - A y - s = 0    (n1 rows)

    where k counts rows of E. The minimizing plan y is read from the primal
    solution, the maximizing plan x from the duals of the second row block.
    """
    a = lp.payoff
    e_mat, e_vec = lp.e_matrix, lp.e_vector
    f_mat, f_vec = lp.f_matrix, lp.f_vector
    k = e_mat.shape[0]
    n1 = e_mat.shape[1]
    n2 = f_mat.shape[1]

    cols = 2 * k + n2 + n1
    rows_f = f_mat.shape[0]
    a_eq = np.zeros((rows_f + n1, cols))
    b_eq = np.zeros(rows_f + n1)
    a_eq[:rows_f, 2 * k:2 * k + n2] = f_mat
    b_eq[:rows_f] = f_vec
    block = slice(rows_f, rows_f + n1)
    a_eq[block, 0:k] = e_mat.T
    a_eq[block, k:2 * k] = -e_mat.T
    a_eq[block, 2 * k:2 * k + n2] = -a
    a_eq[block, 2 * k + n2:] = -np.eye(n1)
    c = np.zeros(cols)
    c[0:k] = e_vec
    c[k:2 * k] = -e_vec

    result = solve_standard_form(c, a_eq, b_eq)
    u = result.x[0:k] - result.x[k:2 * k]
    y = result.x[2 * k:2 * k + n2]
    x = result.duals[rows_f:rows_f + n1]
    return LPSolution(game_value=result.objective, row_plan=x, col_plan=y,
                      u_values=u, pivots=result.pivots)


def lp_dump(lp: SequenceLP) -> str:
    """Plain-text standard-form listing for cross-checking with external solvers."""
    lines = ["minimize e.u  subject to  F y = f,  E.T u - A y >= 0,  y >= 0", ""]
    lines.append(f"rows E: {lp.e_matrix.shape[0]}  cols E: {lp.e_matrix.shape[1]}")
    lines.append(f"rows F: {lp.f_matrix.shape[0]}  cols F: {lp.f_matrix.shape[1]}")
    lines.append("")
    lines.append("payoff matrix A (row sequences x column sequences):")
    for i, row in enumerate(lp.payoff):
        nz = [f"{lp.col_sequences.sequences[j]!r}: {v:.12g}" for j, v in enumerate(row) if v]
        if nz:
            lines.append(f"  {lp.row_sequences.sequences[i]!r}: " + ", ".join(nz))
    for name, mat, vec in (("E", lp.e_matrix, lp.e_vector), ("F", lp.f_matrix, lp.f_vector)):
        lines.append("")
        lines.append(f"{name} x = {name.lower()}:")
        for r in range(mat.shape[0]):
            terms = " + ".join(f"{mat[r, j]:+g}*x{j}" for j in range(mat.shape[1]) if mat[r, j])
            lines.append(f"  {terms} = {vec[r]:g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Plans and behavioural policies


@dataclass
class RealizationPlan:
    values: Dict[Hashable, float]

    def vector(self, seqs: SequenceSet) -> np.ndarray:
        return np.array([self.values.get(seq, 0.0) for seq in seqs.sequences])


def plan_from_policy(seqs: SequenceSet, policy: Mapping[Hashable, Mapping[str, float]],
                     ) -> RealizationPlan:
    """Realization plan induced by a behavioural policy of the owner."""
    values: Dict[Hashable, float] = {EMPTY: 1.0}
    for idx in range(1, len(seqs)):
        key = seqs.infoset_key[idx]
        act = seqs.action[idx]
        parent_value = values[seqs.sequences[seqs.parent[idx]]]
        values[seqs.sequences[idx]] = parent_value * float(policy[key][act])
    return RealizationPlan(values=values)


def validate_plan(plan: RealizationPlan, seqs: SequenceSet, atol: float = 1e-9) -> List[str]:
    problems = []
    x = plan.vector(seqs)
    if abs(x[0] - 1.0) > atol:
        problems.append(f"empty sequence has mass {x[0]!r}")
    if (x < -atol).any():
        problems.append("negative sequence mass")
    for key, parent_idx, children in seqs.infoset_rows:
        flow = sum(x[c] for c in children)
        if abs(flow - x[parent_idx]) > atol:
            problems.append(f"flow violated at infostate {key!r}")
    return problems


def realization_to_behavioral(plan: RealizationPlan, seqs: SequenceSet,
                              atol: float = 1e-9) -> Dict[Hashable, Dict[str, float]]:
    """Behavioural policy x_sa / x_parent, uniform where the parent mass is zero."""
    problems = validate_plan(plan, seqs, atol)
    if problems:
        raise InvalidPlan("; ".join(problems))
    x = plan.vector(seqs)
    policy: Dict[Hashable, Dict[str, float]] = {}
    for key, parent_idx, children in seqs.infoset_rows:
        mass = x[parent_idx]
        if mass > 0.0:
            policy[key] = {seqs.action[c]: max(x[c], 0.0) / mass for c in children}
        else:
            policy[key] = {seqs.action[c]: 1.0 / len(children) for c in children}
    return policy


def lp_profile(rep: ExtensiveFormRep, solution: LPSolution, lp: SequenceLP) -> PolicyProfile:
    """Behavioural profile extracted from an LP solution."""
    x_plan = RealizationPlan(values={
        seq: float(v) for seq, v in zip(lp.row_sequences.sequences, solution.row_plan)})
    y_plan = RealizationPlan(values={
        seq: float(v) for seq, v in zip(lp.col_sequences.sequences, solution.col_plan)})
    return {
        1: realization_to_behavioral(x_plan, lp.row_sequences, atol=1e-6),
        2: realization_to_behavioral(y_plan, lp.col_sequences, atol=1e-6),
    }


def profile_plans(rep: ExtensiveFormRep, profile: PolicyProfile,
                  ) -> Tuple[RealizationPlan, RealizationPlan]:
    seqs1 = enumerate_sequences(rep, 1)
    seqs2 = enumerate_sequences(rep, 2)
    return (plan_from_policy(seqs1, profile[1]), plan_from_policy(seqs2, profile[2]))
