"""Counterfactual regret minimization and best-response analysis.

The solver walks the tree form of a game. Values are always expected future
rewards from a node onward: for unrolled games the per-transition rewards are
the increments of the cumulative reward vector, for classical trees the whole
utility sits on the edge into each leaf. Running the same recursion on both
therefore realizes the future-reward and the total-utility formulations of
the algorithm.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

from .errors import MissingPolicy, NotZeroSum
from .unroll import CHANCE_ACTOR, TERMINAL_ACTOR, ClassicalEFG, ExtensiveFormRep

PolicyProfile = Dict[int, Dict[Hashable, Dict[str, float]]]
Game = Union[ExtensiveFormRep, ClassicalEFG]

KIND_TERMINAL = 0
KIND_CHANCE = 1
KIND_DECISION = 2


@dataclass
class _Iset:
    index: int
    owner: int
    key: Hashable
    actions: Tuple[str, ...]
    members: Tuple[int, ...]


class SolverTree:
    """Flattened tree with per-edge reward vectors shared by all solvers."""

    __slots__ = ("num_players", "kind", "owner", "iset_index", "kids", "isets",
                 "iset_lookup", "depths", "zero_sum_gap", "game")

    def __init__(self, game: Game):
        self.game = game
        n = game.num_players
        self.num_players = n
        nodes = game.nodes
        count = len(nodes)
        self.kind = [KIND_TERMINAL] * count
        self.owner = [0] * count
        self.iset_index = [-1] * count
        self.kids: List[Optional[tuple]] = [None] * count
        self.depths = [node.depth for node in nodes]
        self.isets: List[_Iset] = []
        self.iset_lookup: Dict[Tuple[int, Hashable], int] = {}

        if isinstance(game, ExtensiveFormRep):
            def edge_reward(child):
                return game.edge_reward(child)

            acting = {p: game.acting_infosets(p) for p in game.players}
        else:
            def edge_reward(child):
                if child.actor == TERMINAL_ACTOR:
                    return child.utilities
                return tuple(0.0 for _ in range(n))

            acting = {p: {key: members for key, members in game.infosets[p].items()}
                      for p in game.players}

        for p in game.players:
            for key, members in acting[p].items():
                idx = len(self.isets)
                self.isets.append(_Iset(index=idx, owner=p, key=key,
                                        actions=nodes[members[0]].actions, members=members))
                self.iset_lookup[(p, key)] = idx
                for m in members:
                    self.iset_index[m] = idx

        gap = 0.0
        for node in nodes:
            if node.actor == TERMINAL_ACTOR:
                util = node.cumulative_reward if isinstance(game, ExtensiveFormRep) \
                    else (node.utilities or tuple(0.0 for _ in range(n)))
                if n == 2:
                    gap = max(gap, abs(util[0] + util[1]))
                continue
            if node.actor == CHANCE_ACTOR:
                self.kind[node.id] = KIND_CHANCE
                self.kids[node.id] = tuple(
                    (node.chance_dist[label], node.children[label],
                     edge_reward(nodes[node.children[label]]))
                    for label in node.actions)
            else:
                self.kind[node.id] = KIND_DECISION
                self.owner[node.id] = node.actor
                self.kids[node.id] = tuple(
                    (node.children[label], edge_reward(nodes[node.children[label]]))
                    for label in node.actions)
        self.zero_sum_gap = gap

    def uniform_policies(self) -> List[List[float]]:
        return [[1.0 / len(s.actions)] * len(s.actions) for s in self.isets]

    def policies_from_profile(self, profile: PolicyProfile) -> List[List[float]]:
        out = []
        for s in self.isets:
            per = profile.get(s.owner, {}).get(s.key)
            if per is None:
                raise MissingPolicy(f"no policy for player {s.owner} at infostate {s.key!r}")
            out.append([float(per.get(a, 0.0)) for a in s.actions])
        return out

    def profile_from_policies(self, policies: Sequence[Sequence[float]]) -> PolicyProfile:
        profile: PolicyProfile = {p: {} for p in range(1, self.num_players + 1)}
        for s, dist in zip(self.isets, policies):
            profile[s.owner][s.key] = {a: dist[k] for k, a in enumerate(s.actions)}
        return profile


def regret_matching(regrets: Sequence[float]) -> List[float]:
    """Positive-part-proportional distribution; uniform when nothing is positive."""
    positives = [r if r > 0.0 else 0.0 for r in regrets]
    total = sum(positives)
    if total <= 0.0:
        return [1.0 / len(regrets)] * len(regrets)
    return [r / total for r in positives]


def uniform_profile(game: Game) -> PolicyProfile:
    tree = SolverTree(game)
    return tree.profile_from_policies(tree.uniform_policies())


# ---------------------------------------------------------------------------
# Reach probabilities and expected values (reporting API)


@dataclass
class ReachTable:
    """Per-node reach contributions and per-infostate counterfactual mass."""

    chance: List[float]
    player: Dict[int, List[float]]
    counterfactual: Dict[int, List[float]]
    infoset_counterfactual: Dict[int, Dict[Hashable, float]]

    def joint(self, node_id: int) -> float:
        total = self.chance[node_id]
        for reaches in self.player.values():
            total *= reaches[node_id]
        return total


def reach_probabilities(rep: ExtensiveFormRep, profile: PolicyProfile,
                        seeds: Optional[Dict[int, Tuple[float, Tuple[float, ...]]]] = None,
                        ) -> ReachTable:
    """Single top-down pass filling chance, per-player, and counterfactual reaches.

    ``seeds`` optionally replaces the root initialization: a map from node id
    to (chance reach, per-player reach vector) for the roots of a forest.
    """
    tree = SolverTree(rep)
    policies = tree.policies_from_profile(profile)
    n = rep.num_players
    players = rep.players
    count = len(rep.nodes)
    chance = [0.0] * count
    player = {p: [0.0] * count for p in players}
    if seeds is None:
        seeds = {0: (1.0, tuple(1.0 for _ in players))}
    for nid, (pc, pp) in seeds.items():
        chance[nid] = pc
        for p in players:
            player[p][nid] = pp[p - 1]
    order = sorted(seeds)
    stack = list(order)
    while stack:
        nid = stack.pop()
        kind = tree.kind[nid]
        if kind == KIND_TERMINAL:
            continue
        if kind == KIND_CHANCE:
            for prob, child, _rew in tree.kids[nid]:
                chance[child] = chance[nid] * prob
                for p in players:
                    player[p][child] = player[p][nid]
                stack.append(child)
        else:
            sigma = policies[tree.iset_index[nid]]
            owner = tree.owner[nid]
            for k, (child, _rew) in enumerate(tree.kids[nid]):
                chance[child] = chance[nid]
                for p in players:
                    player[p][child] = player[p][nid] * (sigma[k] if p == owner else 1.0)
                stack.append(child)
    counterfactual = {}
    for p in players:
        others = [q for q in players if q != p]
        cf = [0.0] * count
        for nid in range(count):
            value = chance[nid]
            for q in others:
                value *= player[q][nid]
            cf[nid] = value
        counterfactual[p] = cf
    infoset_cf = {p: {} for p in players}
    for p in players:
        for key, members in rep.infosets[p].items():
            infoset_cf[p][key] = sum(counterfactual[p][m] for m in members)
    return ReachTable(chance=chance, player=player, counterfactual=counterfactual,
                      infoset_counterfactual=infoset_cf)


@dataclass
class ValueTable:
    """Future-reward values per node and per acting infostate."""

    node_value: Dict[int, Tuple[float, ...]]
    node_q: Dict[int, Dict[str, Tuple[float, ...]]]
    infoset_value: Dict[int, Dict[Hashable, float]]
    infoset_q: Dict[int, Dict[Hashable, Dict[str, float]]]
    infoset_cf_value: Dict[int, Dict[Hashable, float]]
    infoset_cf_q: Dict[int, Dict[Hashable, Dict[str, float]]]


def expected_values(rep: Game, profile: PolicyProfile,
                    reach: Optional[ReachTable] = None) -> ValueTable:
    """Bottom-up value pass; infostate aggregates use counterfactual weights.

    At an infostate with zero counterfactual mass the conditional value falls
    back to 0 by convention. Infostate aggregates are filled when reach
    probabilities are available, i.e. for tree-form input or an explicit
    ``reach``; classical trees without one get node values only.
    """
    tree = SolverTree(rep)
    policies = tree.policies_from_profile(profile)
    n = rep.num_players
    players = tuple(range(1, n + 1))
    count = len(rep.nodes)
    values: List[Optional[Tuple[float, ...]]] = [None] * count
    node_q: Dict[int, Dict[str, Tuple[float, ...]]] = {}
    for nid in range(count - 1, -1, -1):  # parents precede children in id order
        kind = tree.kind[nid]
        if kind == KIND_TERMINAL:
            values[nid] = tuple(0.0 for _ in players)
        elif kind == KIND_CHANCE:
            acc = [0.0] * n
            for prob, child, rew in tree.kids[nid]:
                sub = values[child]
                for i in range(n):
                    acc[i] += prob * (rew[i] + sub[i])
            values[nid] = tuple(acc)
        else:
            sigma = policies[tree.iset_index[nid]]
            acc = [0.0] * n
            qs = {}
            for k, (child, rew) in enumerate(tree.kids[nid]):
                sub = values[child]
                q = tuple(rew[i] + sub[i] for i in range(n))
                qs[tree.isets[tree.iset_index[nid]].actions[k]] = q
                for i in range(n):
                    acc[i] += sigma[k] * q[i]
            values[nid] = tuple(acc)
            node_q[nid] = qs

    if reach is None and isinstance(rep, ExtensiveFormRep):
        reach = reach_probabilities(rep, profile)
    infoset_value = {p: {} for p in players}
    infoset_q = {p: {} for p in players}
    infoset_cf_value = {p: {} for p in players}
    infoset_cf_q = {p: {} for p in players}
    if reach is not None:
        for s in tree.isets:
            p = s.owner
            cf_total = sum(reach.counterfactual[p][m] for m in s.members)
            cf_v = sum(reach.counterfactual[p][m] * values[m][p - 1] for m in s.members)
            cf_q = {
                a: sum(reach.counterfactual[p][m] * node_q[m][a][p - 1] for m in s.members)
                for a in s.actions
            }
            infoset_cf_value[p][s.key] = cf_v
            infoset_cf_q[p][s.key] = cf_q
            if cf_total > 0.0:
                infoset_value[p][s.key] = cf_v / cf_total
                infoset_q[p][s.key] = {a: q / cf_total for a, q in cf_q.items()}
            else:
                infoset_value[p][s.key] = 0.0
                infoset_q[p][s.key] = {a: 0.0 for a in s.actions}
    return ValueTable(node_value={i: v for i, v in enumerate(values)},
                      node_q=node_q,
                      infoset_value=infoset_value,
                      infoset_q=infoset_q,
                      infoset_cf_value=infoset_cf_value,
                      infoset_cf_q=infoset_cf_q)


def game_value(game: Game, profile: PolicyProfile) -> Tuple[float, ...]:
    """Expected utility vector of a profile (root future value)."""
    return expected_values(game, profile).node_value[0]


# ---------------------------------------------------------------------------
# Regret minimization


@dataclass
class RegretTable:
    """Cumulative counterfactual regrets and reach-weighted strategy sums."""

    regrets: Dict[int, Dict[Hashable, Dict[str, float]]]
    strategy_sum: Dict[int, Dict[Hashable, Dict[str, float]]]
    iterations: int


@dataclass
class TracePoint:
    iteration: int
    exploitability: float
    value_p1: float
    wall_ms: float


@dataclass
class CfrResult:
    regret_table: RegretTable
    average_profile: PolicyProfile
    trace: List[TracePoint]
    policies: Optional[List[PolicyProfile]] = None


class CfrState:
    """Mutable regret-matching state over a solver tree."""

    def __init__(self, tree: SolverTree):
        self.tree = tree
        self.regrets = [[0.0] * len(s.actions) for s in tree.isets]
        self.strategy_sum = [[0.0] * len(s.actions) for s in tree.isets]
        self.policies = tree.uniform_policies()
        self.iterations = 0
        self._zeros = (0.0,) * tree.num_players

    def refresh_policies(self, only_player: Optional[int] = None,
                         indices: Optional[Sequence[int]] = None) -> None:
        if indices is not None:
            for idx in indices:
                self.policies[idx] = regret_matching(self.regrets[idx])
            return
        for s in self.tree.isets:
            if only_player is None or s.owner == only_player:
                self.policies[s.index] = regret_matching(self.regrets[s.index])

    def walk(self, nid: int, reach_c: float, reach_p: List[float],
             update_player: Optional[int] = None,
             boundary: Optional[Dict[int, Sequence[float]]] = None) -> List[float]:
        """One traversal accumulating regrets and strategy sums.

        ``update_player`` limits updates to one player's infostates (for the
        alternating schedule); ``boundary`` replaces whole subtrees by fixed
        future-value vectors.
        """
        tree = self.tree
        if boundary is not None:
            fixed = boundary.get(nid)
            if fixed is not None:
                return fixed
        kind = tree.kind[nid]
        n = tree.num_players
        if kind == KIND_TERMINAL:
            return self._zeros
        walk = self.walk
        if kind == KIND_CHANCE:
            vals = [0.0] * n
            for prob, child, rew in tree.kids[nid]:
                if prob == 0.0:
                    continue
                sub = walk(child, reach_c * prob, reach_p, update_player, boundary)
                for i in range(n):
                    vals[i] += prob * (rew[i] + sub[i])
            return vals
        s = tree.iset_index[nid]
        sigma = self.policies[s]
        owner = tree.owner[nid]
        ow = owner - 1
        kids = tree.kids[nid]
        vals = [0.0] * n
        qs = []
        saved = reach_p[ow]
        for k, (child, rew) in enumerate(kids):
            prob = sigma[k]
            reach_p[ow] = saved * prob
            sub = walk(child, reach_c, reach_p, update_player, boundary)
            q_own = rew[ow] + sub[ow]
            qs.append(q_own)
            for i in range(n):
                vals[i] += prob * (rew[i] + sub[i])
        reach_p[ow] = saved
        if update_player is None or update_player == owner:
            cf = reach_c
            for j in range(n):
                if j != ow:
                    cf *= reach_p[j]
            regret = self.regrets[s]
            ssum = self.strategy_sum[s]
            v_own = vals[ow]
            for k in range(len(kids)):
                regret[k] += cf * (qs[k] - v_own)
                ssum[k] += saved * sigma[k]
        return vals

    def average_policies(self) -> List[List[float]]:
        """Reach-weighted average policy per infostate.

        Infostates the owner never reached have an empty weighted average; the
        final regret-matched policy stands in there, since regrets at such
        infostates still accumulate counterfactually.
        """
        out = []
        for s in self.tree.isets:
            total = sum(self.strategy_sum[s.index])
            if total > 0.0:
                out.append([x / total for x in self.strategy_sum[s.index]])
            else:
                out.append(regret_matching(self.regrets[s.index]))
        return out

    def regret_table(self) -> RegretTable:
        regrets: Dict[int, Dict[Hashable, Dict[str, float]]] = {}
        ssum: Dict[int, Dict[Hashable, Dict[str, float]]] = {}
        for s in self.tree.isets:
            regrets.setdefault(s.owner, {})[s.key] = {
                a: self.regrets[s.index][k] for k, a in enumerate(s.actions)}
            ssum.setdefault(s.owner, {})[s.key] = {
                a: self.strategy_sum[s.index][k] for k, a in enumerate(s.actions)}
        return RegretTable(regrets=regrets, strategy_sum=ssum, iterations=self.iterations)


def cfr_run(game: Game, iterations: int, mode: str = "simultaneous",
            trace_stride: int = 0, record_policies: bool = False) -> CfrResult:
    """Run regret matching self-play for ``iterations`` rounds.

    ``mode`` selects simultaneous updates of all players per round or one
    player at a time. The average profile weights each round's policy by the
    owner's own reach. With ``trace_stride`` > 0 the exploitability of the
    running average profile is sampled every that many rounds. Each run owns
    its tables; independent runs over one shared game may execute concurrently.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if mode not in ("simultaneous", "alternating"):
        raise ValueError(f"unknown mode {mode!r}")
    tree = SolverTree(game)
    state = CfrState(tree)
    trace: List[TracePoint] = []
    policies_log: List[PolicyProfile] = []
    start = time.perf_counter()
    ones = [1.0] * tree.num_players
    for t in range(iterations):
        state.refresh_policies()
        if record_policies:
            policies_log.append(tree.profile_from_policies([list(p) for p in state.policies]))
        if mode == "simultaneous":
            state.walk(0, 1.0, list(ones))
        else:
            for p in range(1, tree.num_players + 1):
                state.refresh_policies(only_player=p)
                state.walk(0, 1.0, list(ones), update_player=p)
        state.iterations = t + 1
        if trace_stride and ((t + 1) % trace_stride == 0 or t + 1 == iterations):
            avg = tree.profile_from_policies(state.average_policies())
            trace.append(TracePoint(
                iteration=t + 1,
                exploitability=exploitability(game, avg),
                value_p1=game_value(game, avg)[0],
                wall_ms=(time.perf_counter() - start) * 1000.0))
    average = tree.profile_from_policies(state.average_policies())
    return CfrResult(regret_table=state.regret_table(), average_profile=average,
                     trace=trace, policies=policies_log if record_policies else None)


# ---------------------------------------------------------------------------
# Best response and exploitability


def best_response(game: Game, profile: PolicyProfile, player: int,
                  ) -> Tuple[Dict[Hashable, str], float]:
    """Backward-induction best response of one player against a fixed profile.

    Opponent infostates must all be covered by ``profile``; the responder's
    entries are ignored. Returns the pure policy as an action per infostate
    and its expected utility against the profile.
    """
    tree = SolverTree(game)
    n = tree.num_players
    policies: List[Optional[List[float]]] = [None] * len(tree.isets)
    for s in tree.isets:
        if s.owner == player:
            continue
        per = profile.get(s.owner, {}).get(s.key)
        if per is None:
            raise MissingPolicy(f"no policy for player {s.owner} at infostate {s.key!r}")
        policies[s.index] = [float(per.get(a, 0.0)) for a in s.actions]

    count = len(tree.kind)
    cf_reach = [0.0] * count
    cf_reach[0] = 1.0
    stack = [0]
    while stack:
        nid = stack.pop()
        kind = tree.kind[nid]
        if kind == KIND_TERMINAL:
            continue
        if kind == KIND_CHANCE:
            for prob, child, _rew in tree.kids[nid]:
                cf_reach[child] = cf_reach[nid] * prob
                stack.append(child)
        else:
            owner = tree.owner[nid]
            sigma = policies[tree.iset_index[nid]]
            for k, (child, _rew) in enumerate(tree.kids[nid]):
                scale = 1.0 if owner == player else sigma[k]
                cf_reach[child] = cf_reach[nid] * scale
                stack.append(child)

    by_depth: Dict[int, List[int]] = {}
    for nid in range(count):
        by_depth.setdefault(tree.depths[nid], []).append(nid)
    own_isets_at: Dict[int, List[_Iset]] = {}
    for s in tree.isets:
        if s.owner == player:
            depths = {tree.depths[m] for m in s.members}
            if len(depths) > 1:
                raise ValueError("best response requires depth-homogeneous infosets")
            own_isets_at.setdefault(depths.pop(), []).append(s)

    idx = player - 1
    value: List[float] = [0.0] * count
    choice: Dict[Hashable, str] = {}
    choice_index: Dict[int, int] = {}
    for depth in sorted(by_depth, reverse=True):
        for s in own_isets_at.get(depth, ()):
            best_k, best_q = 0, None
            for k in range(len(s.actions)):
                q = 0.0
                for m in s.members:
                    child, rew = tree.kids[m][k]
                    q += cf_reach[m] * (rew[idx] + value[child])
                if best_q is None or q > best_q + 1e-15:
                    best_k, best_q = k, q
            choice[s.key] = s.actions[best_k]
            choice_index[s.index] = best_k
        for nid in by_depth[depth]:
            kind = tree.kind[nid]
            if kind == KIND_TERMINAL:
                value[nid] = 0.0
            elif kind == KIND_CHANCE:
                acc = 0.0
                for prob, child, rew in tree.kids[nid]:
                    acc += prob * (rew[idx] + value[child])
                value[nid] = acc
            elif tree.owner[nid] == player:
                k = choice_index[tree.iset_index[nid]]
                child, rew = tree.kids[nid][k]
                value[nid] = rew[idx] + value[child]
            else:
                sigma = policies[tree.iset_index[nid]]
                acc = 0.0
                for k, (child, rew) in enumerate(tree.kids[nid]):
                    acc += sigma[k] * (rew[idx] + value[child])
                value[nid] = acc
    return choice, value[0]


def exploitability(game: Game, profile: PolicyProfile) -> float:
    """Average best-response gain against the profile in a two-player zero-sum game."""
    tree = SolverTree(game)
    if tree.num_players != 2:
        raise NotZeroSum("exploitability requires a two-player game")
    if tree.zero_sum_gap > 1e-9:
        raise NotZeroSum(f"terminal utilities sum to {tree.zero_sum_gap} > 1e-9")
    _, v1 = best_response(game, profile, 1)
    _, v2 = best_response(game, profile, 2)
    return (v1 + v2) / 2.0


def check_observable_rewards(rep: ExtensiveFormRep, atol: float = 1e-9,
                             ) -> Tuple[bool, Optional[Tuple]]:
    """Whether cumulative rewards are measurable with respect to each player's infostates."""
    for p in rep.players:
        for key, members in rep.infosets[p].items():
            reference = rep.nodes[members[0]].cumulative_reward[p - 1]
            for m in members[1:]:
                if abs(rep.nodes[m].cumulative_reward[p - 1] - reference) > atol:
                    return False, (p, key, members[0], m)
    return True, None
