"""Public-tree decomposition: ranges, belief states, subgames, and trunk solving.

A public state identifies a slice of the history tree shared as common
knowledge. Attaching every player's reach contributions over that slice gives
a public belief state, which is enough to restart solving from there: either
by materializing a standalone game whose initial chance step samples the
slice, or in place by reseeding reach probabilities at the slice and running
the regret updates only below it.
"""

from __future__ import annotations

import concurrent.futures
import time
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Hashable, List, Mapping, Optional, Sequence, Set, Tuple

from .cfr import CfrState, PolicyProfile, SolverTree, TracePoint, exploitability, game_value
from .errors import InconsistentPBS, UnknownPublicState
from .model import NOOP, TICK, FactoredObservation, GameSpec, JointKey
from .unroll import CHANCE_ACTOR, TERMINAL_ACTOR, ExtensiveFormRep, unroll


def _as_rep(game) -> ExtensiveFormRep:
    if isinstance(game, ExtensiveFormRep):
        return game
    from .model import serialize

    return unroll(serialize(game))


# ---------------------------------------------------------------------------
# Public subtrees and the equivalent subgame-tree definitions


@dataclass
class PublicSubtree:
    """All public states extending one public state, with the induced slices."""

    public_states: Tuple[Hashable, ...]
    histories: FrozenSet[int]
    infoset_forests: Dict[int, FrozenSet[Hashable]]


def _extends(key: Tuple, prefix: Tuple) -> bool:
    return len(key) >= len(prefix) and key[:len(prefix)] == prefix


def public_subtree(rep: ExtensiveFormRep, public_state: Hashable) -> PublicSubtree:
    """Desc of a public state plus the history set and per-player infoset forests."""
    if public_state not in rep.public_sets:
        raise UnknownPublicState(f"public state {public_state!r} does not occur")
    descendants = tuple(k for k in rep.public_sets if _extends(k, public_state))
    histories = frozenset(m for k in descendants for m in rep.public_sets[k])
    forests = {}
    for p in rep.players:
        forests[p] = frozenset(rep.infostate_keys[p][m] for m in histories)
    return PublicSubtree(public_states=descendants, histories=histories,
                         infoset_forests=forests)


def subgame_histories(rep: ExtensiveFormRep, anchor: int, method: str,
                      player: int = 1) -> FrozenSet[int]:
    """The history set of the subgame anchored at one history.

    ``method`` selects among the equivalent constructions: "closure" (smallest
    set containing the anchor closed under descendants and public-set
    membership), "extension" (extensions of the anchor's public set),
    "infostate" (union of infosets of extending information states of
    ``player``), and "public" (union of public sets of extending public
    states).
    """
    anchor_pub = rep.public_keys[anchor]
    members = rep.public_sets[anchor_pub]

    if method == "closure":
        selected: Set[int] = set()
        stack = [anchor]
        while stack:
            nid = stack.pop()
            if nid in selected:
                continue
            selected.add(nid)
            stack.extend(rep.nodes[nid].children.values())
            for mate in rep.public_sets[rep.public_keys[nid]]:
                if mate not in selected:
                    stack.append(mate)
        return frozenset(selected)

    if method == "extension":
        selected = set()
        stack = list(members)
        while stack:
            nid = stack.pop()
            if nid in selected:
                continue
            selected.add(nid)
            stack.extend(rep.nodes[nid].children.values())
        return frozenset(selected)

    if method == "infostate":
        starts = {rep.infostate_keys[player][m] for m in members}
        flags = [False] * len(rep.nodes)
        out = set()
        for node in rep.nodes:  # parents precede children
            inherited = flags[node.parent] if node.parent is not None else False
            own = inherited or rep.infostate_keys[player][node.id] in starts
            flags[node.id] = own
            if own:
                out.add(node.id)
        # Union of whole infosets of the extending information states.
        selected = set()
        for nid in out:
            selected.update(rep.infosets[player][rep.infostate_keys[player][nid]])
        return frozenset(selected)

    if method == "public":
        return frozenset(
            m for key, cell in rep.public_sets.items() if _extends(key, anchor_pub)
            for m in cell)

    raise ValueError(f"unknown method {method!r}")


def closed_under_infosets(rep: ExtensiveFormRep, histories: FrozenSet[int]) -> bool:
    for p in rep.players:
        for nid in histories:
            if any(m not in histories for m in rep.infosets[p][rep.infostate_keys[p][nid]]):
                return False
    return True


# ---------------------------------------------------------------------------
# Ranges and public belief states


@dataclass
class Range:
    """Reach contributions of every actor over one public state.

    ``player_mass`` aggregates each player's own reach per information state
    (summed over the member histories). ``chance_mass`` and
    ``history_player_reach`` keep the per-history data the subgame
    construction consumes; chance contributions vary inside an infoset, so
    they stay keyed by history.
    """

    public_state: Hashable
    player_mass: Dict[int, Dict[Hashable, float]]
    chance_mass: Dict[int, float]
    history_player_reach: Dict[int, Tuple[float, ...]]
    normalized: bool = False
    fallback_uniform: Dict[int, bool] = field(default_factory=dict)

    def normalize(self) -> "Range":
        """Per-player normalized view; zero-mass players fall back to uniform."""
        mass: Dict[int, Dict[Hashable, float]] = {}
        fallback: Dict[int, bool] = {}
        for p, entries in self.player_mass.items():
            total = sum(entries.values())
            if total > 0.0:
                mass[p] = {k: v / total for k, v in entries.items()}
                fallback[p] = False
            else:
                mass[p] = {k: 1.0 / len(entries) for k in entries}
                fallback[p] = True
        return replace(self, player_mass=mass, normalized=True, fallback_uniform=fallback)

    def chance_mass_for(self, rep: ExtensiveFormRep, player: int, key: Hashable) -> float:
        """Chance reach aggregated over the member histories of one infostate."""
        members = [h for h in self.chance_mass if rep.infostate_keys[player][h] == key]
        return sum(self.chance_mass[h] for h in members)

    def joint_mass(self) -> Dict[int, float]:
        """Full reach probability of each member history."""
        out = {}
        for h, pc in self.chance_mass.items():
            total = pc
            for reach in self.history_player_reach[h]:
                total *= reach
            out[h] = total
        return out

    def encode(self) -> Tuple:
        """Canonical hashable form for embedding into an observation symbol."""
        per_player = tuple(
            (p, tuple(sorted(((repr(k), v) for k, v in entries.items()))))
            for p, entries in sorted(self.player_mass.items()))
        per_history = tuple(sorted(self.chance_mass.items()))
        return ("range", per_player, per_history)


@dataclass
class PublicBeliefState:
    public_state: Hashable
    range: Range

    def __post_init__(self) -> None:
        if self.range.public_state != self.public_state:
            raise InconsistentPBS("range carries a different public state")


def range_at(rep: ExtensiveFormRep, profile: PolicyProfile, public_state: Hashable) -> Range:
    """Collect every actor's reach contributions over one public state.

    The profile must cover every decision infostate strictly above the public
    state; entries elsewhere are ignored (reaches at the slice cannot depend
    on them).
    """
    from .cfr import reach_probabilities
    from .errors import MissingPolicy

    if public_state not in rep.public_sets:
        raise UnknownPublicState(f"public state {public_state!r} does not occur")
    padded: PolicyProfile = {p: {} for p in rep.players}
    for p in rep.players:
        for key, members in rep.acting_infosets(p).items():
            given = profile.get(p, {}).get(key)
            if given is None:
                member_pub = rep.public_keys[members[0]]
                if len(member_pub) < len(public_state) and \
                        public_state[:len(member_pub)] == member_pub:
                    raise MissingPolicy(
                        f"no policy for player {p} at infostate {key!r} above the slice")
                actions = rep.infoset_actions(p, key)
                given = {a: 1.0 / len(actions) for a in actions}
            padded[p][key] = given
    reach = reach_probabilities(rep, padded)
    members = rep.public_sets[public_state]
    player_mass: Dict[int, Dict[Hashable, float]] = {}
    for p in rep.players:
        per: Dict[Hashable, float] = {}
        for m in members:
            key = rep.infostate_keys[p][m]
            per[key] = per.get(key, 0.0) + reach.player[p][m]
        player_mass[p] = per
    chance_mass = {m: reach.chance[m] for m in members}
    history_reach = {m: tuple(reach.player[p][m] for p in rep.players) for m in members}
    return Range(public_state=public_state, player_mass=player_mass,
                 chance_mass=chance_mass, history_player_reach=history_reach)


def trivial_pbs(rep: ExtensiveFormRep) -> PublicBeliefState:
    """The root public belief state: point mass on the initial history."""
    root_key = rep.public_keys[0]
    player_mass = {p: {rep.infostate_keys[p][0]: 1.0} for p in rep.players}
    rng = Range(public_state=root_key, player_mass=player_mass,
                chance_mass={0: 1.0},
                history_player_reach={0: tuple(1.0 for _ in rep.players)})
    return PublicBeliefState(public_state=root_key, range=rng)


# ---------------------------------------------------------------------------
# Materialized subgames


def build_subgame(game, pbs: PublicBeliefState) -> GameSpec:
    """Materialize the game that restarts play at a public belief state.

    A playerless initial state samples a member history with its normalized
    joint reach, pays that history's accumulated rewards, privately reveals
    each player's information state, and publicly reveals the public state
    together with the whole range. Solvers running on the result are expected
    to substitute the range's per-player reaches for the chance-absorbed ones.
    """
    rep = _as_rep(game)
    key = pbs.public_state
    if key not in rep.public_sets:
        raise UnknownPublicState(f"public state {key!r} does not occur")
    members = rep.public_sets[key]
    rng = pbs.range
    missing = [m for m in members if m not in rng.chance_mass or m not in rng.history_player_reach]
    if missing:
        raise InconsistentPBS(f"range lacks entries for member histories {missing}")
    joint = rng.joint_mass()
    total = sum(joint[m] for m in members)
    if total <= 0.0:
        raise InconsistentPBS("range assigns zero mass to the whole public set")

    players = rep.players
    noop_joint = tuple(NOOP for _ in players)
    zero = tuple(0.0 for _ in players)

    subtree: Set[int] = set()
    stack = list(members)
    while stack:
        nid = stack.pop()
        if nid in subtree:
            continue
        subtree.add(nid)
        stack.extend(rep.nodes[nid].children.values())

    info_symbol = {
        p: {k: f"s{p}.{i}" for i, k in enumerate(sorted(
            {rep.infostate_keys[p][nid] for nid in subtree}, key=repr))}
        for p in players
    }
    pub_symbol = {
        k: f"pub.{i}" for i, k in enumerate(sorted(
            {rep.public_keys[nid] for nid in subtree}, key=repr))
    }

    def name(nid: int) -> str:
        return f"sg{nid}"

    states: List[str] = ["init"]
    player_fn: Dict[str, frozenset] = {"init": frozenset()}
    legal: Dict[Tuple[str, int], Tuple[str, ...]] = {}
    transitions: Dict[Tuple[str, JointKey], Dict[str, float]] = {}
    rewards: Dict[Tuple[str, JointKey], Tuple[float, ...]] = {}
    observations: Dict[Tuple[str, JointKey, str], FactoredObservation] = {}

    reveal_pub = ("subgame", key, rng.encode())
    tick = FactoredObservation(private=tuple(TICK for _ in players), public=TICK)

    transitions[("init", noop_joint)] = {f"aux{m}": joint[m] / total for m in members}
    rewards[("init", noop_joint)] = zero
    for m in members:
        aux = f"aux{m}"
        states.append(aux)
        player_fn[aux] = frozenset()
        observations[("init", noop_joint, aux)] = tick
        transitions[(aux, noop_joint)] = {name(m): 1.0}
        rewards[(aux, noop_joint)] = rep.nodes[m].cumulative_reward
        observations[(aux, noop_joint, name(m))] = FactoredObservation(
            private=tuple(info_symbol[p][rep.infostate_keys[p][m]] for p in players),
            public=reveal_pub)

    for nid in sorted(subtree):
        node = rep.nodes[nid]
        w = name(nid)
        states.append(w)
        if node.actor == TERMINAL_ACTOR:
            player_fn[w] = frozenset()
            continue
        edge_obs = {
            cid: FactoredObservation(
                private=tuple(info_symbol[p][rep.infostate_keys[p][cid]] for p in players),
                public=pub_symbol[rep.public_keys[cid]])
            for cid in node.children.values()
        }
        if node.actor == CHANCE_ACTOR:
            player_fn[w] = frozenset()
            transitions[(w, noop_joint)] = {
                name(node.children[label]): node.chance_dist[label] for label in node.actions}
            base = None
            for label in node.actions:
                child = rep.nodes[node.children[label]]
                reward = rep.edge_reward(child)
                base = reward if base is None else base
                observations[(w, noop_joint, name(child.id))] = edge_obs[child.id]
            rewards[(w, noop_joint)] = base if base is not None else zero
        else:
            player = node.actor
            player_fn[w] = frozenset({player})
            legal[(w, player)] = node.actions
            for label in node.actions:
                child = rep.nodes[node.children[label]]
                jkey = tuple(label if p == player else NOOP for p in players)
                transitions[(w, jkey)] = {name(child.id): 1.0}
                rewards[(w, jkey)] = rep.edge_reward(child)
                observations[(w, jkey, name(child.id))] = edge_obs[child.id]

    return GameSpec(
        num_players=rep.num_players,
        states=tuple(states),
        initial_state="init",
        player_fn=player_fn,
        legal_actions=legal,
        transitions=transitions,
        rewards=rewards,
        observations=observations,
    )


def subgame_profile(rep: ExtensiveFormRep, sub_rep: ExtensiveFormRep,
                    profile: PolicyProfile) -> PolicyProfile:
    """Transfer a full-game profile onto the unrolled materialized subgame."""
    out: PolicyProfile = {p: {} for p in rep.players}
    for node in sub_rep.nodes:
        w = node.world_state
        if w is None or not w.startswith("sg"):
            continue
        orig = int(w[2:])
        p = node.actor
        if p in (CHANCE_ACTOR, TERMINAL_ACTOR):
            continue
        sub_key = sub_rep.infostate_keys[p][node.id]
        orig_key = rep.infostate_keys[p][orig]
        out[p][sub_key] = dict(profile[p][orig_key])
    return out


# ---------------------------------------------------------------------------
# Trunks and the decomposition solver


@dataclass(frozen=True)
class Trunk:
    """An ancestor-closed set of public states containing the root."""

    keys: FrozenSet[Hashable]

    @staticmethod
    def from_depth(rep: ExtensiveFormRep, depth: int) -> "Trunk":
        """The first ``depth`` levels of the public tree."""
        if depth < 1:
            raise ValueError("trunk depth must be >= 1")
        return Trunk(keys=frozenset(k for k in rep.public_sets if len(k) < depth))

    def validate(self, rep: ExtensiveFormRep) -> None:
        if rep.public_keys[0] not in self.keys:
            raise ValueError("trunk must contain the root public state")
        for key in self.keys:
            if key not in rep.public_sets:
                raise UnknownPublicState(f"trunk key {key!r} does not occur")
            if len(key) and key[:-1] not in self.keys:
                raise ValueError(f"trunk is not closed under ancestors at {key!r}")

    def leaves(self, rep: ExtensiveFormRep) -> List[Hashable]:
        """Public states just below the trunk, in first-occurrence order."""
        out = []
        for key in rep.public_sets:
            if key not in self.keys and len(key) and key[:-1] in self.keys:
                out.append(key)
        return out


@dataclass
class CfrDResult:
    average_profile: PolicyProfile           # trunk infostates only
    completed_profile: PolicyProfile         # trunk average plus averaged subgame play
    trace: List[TracePoint]
    policies: Optional[List[PolicyProfile]] = None
    leaf_keys: List[Hashable] = field(default_factory=list)


def _trunk_reaches(tree: SolverTree, policies: List[List[float]],
                   entry_set: Set[int]) -> Dict[int, Tuple[float, Tuple[float, ...]]]:
    """Chance and per-player reaches of every entry node under the trunk policy."""
    n = tree.num_players
    out: Dict[int, Tuple[float, Tuple[float, ...]]] = {}
    stack: List[Tuple[int, float, Tuple[float, ...]]] = [(0, 1.0, tuple(1.0 for _ in range(n)))]
    while stack:
        nid, pc, pp = stack.pop()
        if nid in entry_set:
            out[nid] = (pc, pp)
            continue
        kind = tree.kind[nid]
        if kind == 0:
            continue
        if kind == 1:
            for prob, child, _rew in tree.kids[nid]:
                stack.append((child, pc * prob, pp))
        else:
            sigma = policies[tree.iset_index[nid]]
            ow = tree.owner[nid] - 1
            for k, (child, _rew) in enumerate(tree.kids[nid]):
                scaled = pp[:ow] + (pp[ow] * sigma[k],) + pp[ow + 1:]
                stack.append((child, pc, scaled))
    return out


def _policy_values(tree: SolverTree, policies: List[List[float]], nid: int) -> List[float]:
    """Expected future reward vector at a node under fixed policies."""
    n = tree.num_players
    kind = tree.kind[nid]
    if kind == 0:
        return [0.0] * n
    vals = [0.0] * n
    if kind == 1:
        for prob, child, rew in tree.kids[nid]:
            if prob == 0.0:
                continue
            sub = _policy_values(tree, policies, child)
            for i in range(n):
                vals[i] += prob * (rew[i] + sub[i])
        return vals
    sigma = policies[tree.iset_index[nid]]
    for k, (child, rew) in enumerate(tree.kids[nid]):
        prob = sigma[k]
        sub = _policy_values(tree, policies, child)
        for i in range(n):
            vals[i] += prob * (rew[i] + sub[i])
    return vals


@dataclass
class _LeafSolve:
    solved: Dict[int, List[float]]          # average policy per subgame infoset index
    strategy_sum: Dict[int, List[float]]    # raw reach-weighted sums of the solve
    boundary: Dict[int, List[float]]        # per-entry value vector for the trunk update


def _solve_leaf(tree: SolverTree, entries: Sequence[int],
                seeds: Mapping[int, Tuple[float, Tuple[float, ...]]],
                iset_indices: Sequence[int], budget: int) -> _LeafSolve:
    """Solve one leaf subgame in place with range-substituted reaches.

    The boundary values give each player their counterfactual best response
    against the solved strategy; this keeps the trunk update honest about
    actions the current range excludes. With an exact subgame equilibrium they
    coincide with the equilibrium values.
    """
    state = CfrState(tree)
    no_reach = (0.0, tuple(0.0 for _ in range(tree.num_players)))
    seeded = [(h,) + seeds.get(h, no_reach) for h in entries]
    for _ in range(budget):
        state.refresh_policies(indices=iset_indices)
        for h, pc, pp in seeded:
            state.walk(h, pc, list(pp))
    averages = state.average_policies()
    solved = {idx: averages[idx] for idx in iset_indices}
    policies = list(state.policies)
    for idx in iset_indices:
        policies[idx] = solved[idx]
    boundary = {h: [0.0] * tree.num_players for h in entries}
    for player in range(1, tree.num_players + 1):
        values = _subgame_best_response(tree, entries, seeds, iset_indices, policies, player)
        for h in entries:
            boundary[h][player - 1] = values[h]
    return _LeafSolve(solved=solved,
                      strategy_sum={idx: list(state.strategy_sum[idx]) for idx in iset_indices},
                      boundary=boundary)


def _subgame_best_response(tree: SolverTree, entries: Sequence[int],
                           seeds: Mapping[int, Tuple[float, Tuple[float, ...]]],
                           iset_indices: Sequence[int],
                           policies: Sequence[Sequence[float]], player: int,
                           ) -> Dict[int, float]:
    """Entry values of one player's best response inside a solved subgame.

    Opponents and chance follow ``policies``; the responder maximizes per
    infoset under counterfactual weights seeded from the range.
    """
    idx = player - 1
    cf_reach: Dict[int, float] = {}
    order: List[int] = []
    stack: List[Tuple[int, float]] = []
    for h in entries:
        pc, pp = seeds.get(h, (0.0, tuple(0.0 for _ in range(tree.num_players))))
        weight = pc
        for j, reach in enumerate(pp):
            if j != idx:
                weight *= reach
        stack.append((h, weight))
    while stack:
        nid, weight = stack.pop()
        cf_reach[nid] = weight
        order.append(nid)
        kind = tree.kind[nid]
        if kind == 0:
            continue
        if kind == 1:
            for prob, child, _rew in tree.kids[nid]:
                stack.append((child, weight * prob))
        else:
            owner = tree.owner[nid]
            sigma = policies[tree.iset_index[nid]]
            for k, (child, _rew) in enumerate(tree.kids[nid]):
                scale = 1.0 if owner == player else sigma[k]
                stack.append((child, weight * scale))

    own_isets: Dict[int, List[int]] = {}
    for s_idx in iset_indices:
        s = tree.isets[s_idx]
        if s.owner == player:
            depths = {tree.depths[m] for m in s.members}
            own_isets.setdefault(max(depths), []).append(s_idx)

    by_depth: Dict[int, List[int]] = {}
    for nid in order:
        by_depth.setdefault(tree.depths[nid], []).append(nid)

    value: Dict[int, float] = {}
    choice: Dict[int, int] = {}
    for depth in sorted(by_depth, reverse=True):
        for s_idx in own_isets.get(depth, ()):
            s = tree.isets[s_idx]
            best_k, best_q = 0, None
            for k in range(len(s.actions)):
                q = 0.0
                for m in s.members:
                    if m not in cf_reach:
                        continue
                    child, rew = tree.kids[m][k]
                    q += cf_reach[m] * (rew[idx] + value[child])
                if best_q is None or q > best_q + 1e-15:
                    best_k, best_q = k, q
            choice[s_idx] = best_k
        for nid in by_depth[depth]:
            kind = tree.kind[nid]
            if kind == 0:
                value[nid] = 0.0
            elif kind == 1:
                acc = 0.0
                for prob, child, rew in tree.kids[nid]:
                    acc += prob * (rew[idx] + value[child])
                value[nid] = acc
            elif tree.owner[nid] == player:
                k = choice[tree.iset_index[nid]]
                child, rew = tree.kids[nid][k]
                value[nid] = rew[idx] + value[child]
            else:
                sigma = policies[tree.iset_index[nid]]
                acc = 0.0
                for k, (child, rew) in enumerate(tree.kids[nid]):
                    acc += sigma[k] * (rew[idx] + value[child])
                value[nid] = acc
    return {h: value[h] for h in entries}


def cfr_d(game, trunk: Trunk, iterations: int, subgame_budget: int,
          trace_stride: int = 0, record_policies: bool = False,
          parallel_leaves: bool = False, leaf_solver=None) -> CfrDResult:
    """Trunk-restricted regret minimization with per-iteration leaf subgame solves.

    Each round computes reach probabilities through the trunk under the
    current trunk policy, solves every leaf subgame for the resulting range,
    feeds the solved subgames' entry values into the trunk regret update, and
    regret-matches. The returned profile is the unweighted arithmetic mean of
    the trunk policies produced after each round.

    ``leaf_solver`` swaps the subgame solver; the default runs regret matching
    for ``subgame_budget`` rounds with range-substituted reaches. A substitute
    must honour the same contract: solve the subgame under the given seeds and
    report per-entry best-response-quality values.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    solve_one = leaf_solver if leaf_solver is not None else _solve_leaf
    rep = _as_rep(game)
    trunk.validate(rep)
    tree = SolverTree(rep)
    leaf_keys = trunk.leaves(rep)
    leaf_entries = {key: rep.public_sets[key] for key in leaf_keys}
    entry_set = {h for members in leaf_entries.values() for h in members}

    def iset_public(idx: int) -> Hashable:
        return rep.public_keys[tree.isets[idx].members[0]]

    trunk_isets = [s.index for s in tree.isets if iset_public(s.index) in trunk.keys]
    leaf_isets = {
        key: [s.index for s in tree.isets if _extends(iset_public(s.index), key)]
        for key in leaf_keys
    }

    state = CfrState(tree)
    policy_sum = {idx: [0.0] * len(tree.isets[idx].actions) for idx in trunk_isets}
    sub_sum = {idx: [0.0] * len(tree.isets[idx].actions)
               for indices in leaf_isets.values() for idx in indices}
    last_solved: Dict[int, List[float]] = {}
    trace: List[TracePoint] = []
    policies_log: List[PolicyProfile] = []
    start = time.perf_counter()

    def absorb(solve: _LeafSolve, boundary: Dict[int, List[float]]) -> None:
        boundary.update(solve.boundary)
        for idx, sums in solve.strategy_sum.items():
            acc = sub_sum[idx]
            for k in range(len(acc)):
                acc[k] += sums[k]
        last_solved.update(solve.solved)

    def solve_all(seeds) -> Dict[int, List[float]]:
        boundary: Dict[int, List[float]] = {}
        if parallel_leaves and len(leaf_keys) > 1:
            with concurrent.futures.ThreadPoolExecutor() as pool:
                futures = {
                    key: pool.submit(solve_one, tree, leaf_entries[key], seeds,
                                     leaf_isets[key], subgame_budget)
                    for key in leaf_keys
                }
                for key in leaf_keys:  # deterministic merge order
                    absorb(futures[key].result(), boundary)
        else:
            for key in leaf_keys:
                absorb(solve_one(tree, leaf_entries[key], seeds,
                                 leaf_isets[key], subgame_budget), boundary)
        return boundary

    def completed_from(trunk_avg: PolicyProfile) -> PolicyProfile:
        completed = {p: dict(trunk_avg.get(p, {})) for p in rep.players}
        for idx, sums in sub_sum.items():
            s = tree.isets[idx]
            total = sum(sums)
            if total > 0.0:
                dist = [x / total for x in sums]
            else:
                dist = last_solved.get(idx, [1.0 / len(s.actions)] * len(s.actions))
            completed[s.owner][s.key] = {a: dist[k] for k, a in enumerate(s.actions)}
        return completed

    for t in range(iterations):
        if record_policies:
            policies_log.append(tree.profile_from_policies([list(p) for p in state.policies]))
        if leaf_keys:
            seeds = _trunk_reaches(tree, state.policies, entry_set)
            boundary = solve_all(seeds)
        else:
            boundary = None
        state.walk(0, 1.0, [1.0] * tree.num_players, boundary=boundary)
        state.refresh_policies(indices=trunk_isets)
        for idx in trunk_isets:
            sums = policy_sum[idx]
            current = state.policies[idx]
            for k in range(len(sums)):
                sums[k] += current[k]
        state.iterations = t + 1
        if trace_stride and ((t + 1) % trace_stride == 0 or t + 1 == iterations):
            completed = completed_from(_trunk_average(tree, trunk_isets, policy_sum, t + 1))
            trace.append(TracePoint(
                iteration=t + 1,
                exploitability=exploitability(rep, completed),
                value_p1=game_value(rep, completed)[0],
                wall_ms=(time.perf_counter() - start) * 1000.0))

    average = _trunk_average(tree, trunk_isets, policy_sum, iterations)
    return CfrDResult(average_profile=average, completed_profile=completed_from(average),
                      trace=trace, policies=policies_log if record_policies else None,
                      leaf_keys=leaf_keys)


def _trunk_average(tree: SolverTree, trunk_isets: Sequence[int],
                   policy_sum: Mapping[int, Sequence[float]], rounds: int) -> PolicyProfile:
    profile: PolicyProfile = {p: {} for p in range(1, tree.num_players + 1)}
    for idx in trunk_isets:
        s = tree.isets[idx]
        profile[s.owner][s.key] = {
            a: policy_sum[idx][k] / rounds for k, a in enumerate(s.actions)}
    return profile


def complete_profile(rep: ExtensiveFormRep, trunk: Trunk, trunk_profile: PolicyProfile,
                     subgame_budget: int, tree: Optional[SolverTree] = None) -> PolicyProfile:
    """Extend a trunk profile to the whole game by re-solving every leaf subgame."""
    tree = tree or SolverTree(rep)
    leaf_keys = trunk.leaves(rep)
    leaf_entries = {key: rep.public_sets[key] for key in leaf_keys}
    entry_set = {h for members in leaf_entries.values() for h in members}

    policies = tree.uniform_policies()
    for s in tree.isets:
        per = trunk_profile.get(s.owner, {}).get(s.key)
        if per is not None:
            policies[s.index] = [float(per.get(a, 0.0)) for a in s.actions]

    def iset_public(idx: int) -> Hashable:
        return rep.public_keys[tree.isets[idx].members[0]]

    completed: PolicyProfile = {p: dict(trunk_profile.get(p, {})) for p in rep.players}
    seeds = _trunk_reaches(tree, policies, entry_set)
    for key in leaf_keys:
        indices = [s.index for s in tree.isets if _extends(iset_public(s.index), key)]
        solve = _solve_leaf(tree, leaf_entries[key], seeds, indices, subgame_budget)
        for idx in indices:
            s = tree.isets[idx]
            completed[s.owner][s.key] = {a: solve.solved[idx][k] for k, a in enumerate(s.actions)}
    return completed
