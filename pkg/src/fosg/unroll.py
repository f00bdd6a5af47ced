"""Unrolling serial games into their tree representation.

The tree form carries, besides the history tree itself, one information
partition per player covering every node (not only the nodes where the player
acts) and a public partition that each player partition refines. Classical
game trees keep only the acting-player cells; the functions here convert in
both directions and back into the tabular game model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Tuple

from .errors import (DepthExceeded, ImperfectRecall, NotOneTimeable, NotSerial,
                     ThickPublicSets)
from .model import (EMPTY_PUBLIC, NOOP, FactoredObservation, GameSpec, InfoKey,
                    JointKey, advance_keys, is_serial, merge_chance)

CHANCE_ACTOR = 0
TERMINAL_ACTOR = -1


@dataclass
class HistoryNode:
    """One history of the unrolled game.

    ``actor`` is a player index, 0 for chance, -1 for terminal nodes.
    ``cumulative_reward`` is the running reward vector along the history and
    doubles as the utility vector at terminals.
    """

    id: int
    parent: Optional[int]
    incoming_action: Optional[str]
    world_state: Optional[str]
    actor: int
    depth: int
    cumulative_reward: Tuple[float, ...]
    actions: Tuple[str, ...] = ()
    chance_dist: Optional[Dict[str, float]] = None
    children: Dict[str, int] = field(default_factory=dict)
    incoming_obs: Optional[FactoredObservation] = None


@dataclass
class ExtensiveFormRep:
    """A history tree with per-player partitions over all nodes plus a public partition.

    Treated as immutable once built; concurrent read-only traversal is safe.
    """

    num_players: int
    nodes: List[HistoryNode]
    infostate_keys: Dict[int, List[Hashable]]
    infosets: Dict[int, Dict[Hashable, Tuple[int, ...]]]
    public_keys: List[Hashable]
    public_sets: Dict[Hashable, Tuple[int, ...]]

    @property
    def root(self) -> HistoryNode:
        return self.nodes[0]

    @property
    def players(self) -> Tuple[int, ...]:
        return tuple(range(1, self.num_players + 1))

    def terminals(self) -> List[HistoryNode]:
        return [n for n in self.nodes if n.actor == TERMINAL_ACTOR]

    def utility(self, node_id: int) -> Tuple[float, ...]:
        return self.nodes[node_id].cumulative_reward

    def edge_reward(self, child: HistoryNode) -> Tuple[float, ...]:
        parent = self.nodes[child.parent]
        return tuple(c - p for c, p in zip(child.cumulative_reward, parent.cumulative_reward))

    def acting_infosets(self, player: int) -> Dict[Hashable, Tuple[int, ...]]:
        return {key: members for key, members in self.infosets[player].items()
                if self.nodes[members[0]].actor == player}

    def infoset_actions(self, player: int, key: Hashable) -> Tuple[str, ...]:
        return self.nodes[self.infosets[player][key][0]].actions

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when node ``a`` is a strict ancestor of node ``b``."""
        node = self.nodes[b]
        while node.parent is not None:
            if node.parent == a:
                return True
            node = self.nodes[node.parent]
        return False


@dataclass
class EfgNode:
    """One node of a classical game tree; ``utilities`` is set at leaves only."""

    id: int
    name: str
    parent: Optional[int]
    incoming_action: Optional[str]
    actor: int
    depth: int
    actions: Tuple[str, ...] = ()
    chance_dist: Optional[Dict[str, float]] = None
    children: Dict[str, int] = field(default_factory=dict)
    utilities: Optional[Tuple[float, ...]] = None


@dataclass
class ClassicalEFG:
    """A game tree whose information partitions cover only the acting player's nodes."""

    num_players: int
    nodes: List[EfgNode]
    infosets: Dict[int, Dict[Hashable, Tuple[int, ...]]]

    @property
    def root(self) -> EfgNode:
        return self.nodes[0]

    @property
    def players(self) -> Tuple[int, ...]:
        return tuple(range(1, self.num_players + 1))

    def terminals(self) -> List[EfgNode]:
        return [n for n in self.nodes if n.actor == TERMINAL_ACTOR]

    def infoset_of(self, player: int) -> Dict[int, Hashable]:
        out = {}
        for key, members in self.infosets[player].items():
            for m in members:
                out[m] = key
        return out


def unroll(spec: GameSpec, depth_bound: int = 64) -> ExtensiveFormRep:
    """Materialize the full reachable tree of a serial game.

    Nodes are numbered in breadth-first order. Information partitions group
    nodes by identical action-observation sequences, the public partition by
    identical public-observation sequences. Raises NotSerial for
    simultaneous-move input and DepthExceeded when a non-terminal node sits at
    ``depth_bound``.
    """
    if spec.has_chance_actor:
        spec = merge_chance(spec)
    if not is_serial(spec):
        raise NotSerial("unroll requires a serial game; call serialize() first")

    nplayers = spec.num_players
    nodes: List[HistoryNode] = []
    keys: Dict[int, List[InfoKey]] = {p: [] for p in spec.players}
    pub_keys: List[Tuple[Hashable, ...]] = []

    def actor_of(state: str) -> int:
        if spec.is_terminal(state):
            return TERMINAL_ACTOR
        players = spec.active_players(state)
        return players[0] if players else CHANCE_ACTOR

    root = HistoryNode(id=0, parent=None, incoming_action=None, world_state=spec.initial_state,
                       actor=actor_of(spec.initial_state), depth=0,
                       cumulative_reward=tuple(0.0 for _ in spec.players))
    nodes.append(root)
    for p in spec.players:
        keys[p].append(())
    pub_keys.append(())

    frontier = [0]
    while frontier:
        next_frontier: List[int] = []
        for nid in frontier:
            node = nodes[nid]
            state = node.world_state
            if node.actor == TERMINAL_ACTOR:
                continue
            if node.depth >= depth_bound:
                raise DepthExceeded(f"non-terminal node at depth {depth_bound} (state {state!r})")
            if node.actor == CHANCE_ACTOR:
                joint = spec.noop_joint(state)
                dist = spec.transitions[(state, joint)]
                # Zero-probability outcomes are kept only when observable, so
                # subgames built over a support-shrinking range keep their shape.
                successors = [s for s in sorted(dist)
                              if dist[s] > 0 or (state, joint, s) in spec.observations]
                node.actions = tuple(successors)
                node.chance_dist = {succ: dist[succ] for succ in successors}
                assignment: Mapping[int, str] = {}
                outcomes = [(succ, succ) for succ in successors]
            else:
                player = node.actor
                acts = spec.legal_actions[(state, player)]
                node.actions = acts
                joint = None
                outcomes = []
                for a in acts:
                    j = spec.joint_for(state, {player: a})
                    dist = spec.transitions[(state, j)]
                    (succ,) = [s for s, p in dist.items() if p > 0]
                    outcomes.append((a, succ))
            for label, succ in outcomes:
                if node.actor == CHANCE_ACTOR:
                    j = spec.noop_joint(state)
                    assignment = {}
                else:
                    j = spec.joint_for(state, {node.actor: label})
                    assignment = {node.actor: label}
                reward = spec.rewards[(state, j)]
                obs = spec.observations[(state, j, succ)]
                child = HistoryNode(
                    id=len(nodes), parent=nid, incoming_action=label, world_state=succ,
                    actor=actor_of(succ), depth=node.depth + 1,
                    cumulative_reward=tuple(c + r for c, r in zip(node.cumulative_reward, reward)),
                    incoming_obs=obs)
                nodes.append(child)
                node.children[label] = child.id
                parent_keys = tuple(keys[p][nid] for p in spec.players)
                advanced = advance_keys(nplayers, parent_keys, assignment, obs)
                for p in spec.players:
                    keys[p].append(advanced[p - 1])
                pub_keys.append(pub_keys[nid] + (obs.public,))
                next_frontier.append(child.id)
        frontier = next_frontier

    infosets: Dict[int, Dict[Hashable, Tuple[int, ...]]] = {}
    for p in spec.players:
        cells: Dict[Hashable, List[int]] = {}
        for n in nodes:
            cells.setdefault(keys[p][n.id], []).append(n.id)
        infosets[p] = {k: tuple(v) for k, v in cells.items()}
    public_sets: Dict[Hashable, List[int]] = {}
    for n in nodes:
        public_sets.setdefault(pub_keys[n.id], []).append(n.id)

    rep = ExtensiveFormRep(
        num_players=nplayers,
        nodes=nodes,
        infostate_keys={p: list(keys[p]) for p in spec.players},
        infosets=infosets,
        public_keys=list(pub_keys),
        public_sets={k: tuple(v) for k, v in public_sets.items()},
    )
    _check_acting_homogeneity(rep)
    return rep


def _check_acting_homogeneity(rep: ExtensiveFormRep) -> None:
    for p in rep.players:
        for key, members in rep.infosets[p].items():
            actors = {rep.nodes[m].actor for m in members}
            if p in actors and len(actors) > 1:
                raise ValueError(f"infoset {key!r} of player {p} mixes acting and non-acting nodes")
            if p in actors:
                action_sets = {rep.nodes[m].actions for m in members}
                if len(action_sets) > 1:
                    raise ValueError(f"infoset {key!r} of player {p} mixes legal action sets")


def thick_public_set_witness(rep: ExtensiveFormRep) -> Optional[Tuple[int, int]]:
    """A (ancestor, descendant) pair sharing a public set, or None."""
    for members in rep.public_sets.values():
        cell = set(members)
        for m in members:
            node = rep.nodes[m]
            while node.parent is not None:
                if node.parent in cell:
                    return (node.parent, m)
                node = rep.nodes[node.parent]
    return None


def has_thick_public_sets(rep: ExtensiveFormRep) -> bool:
    return thick_public_set_witness(rep) is not None


def check_perfect_recall(game) -> Tuple[bool, Optional[Tuple]]:
    """Verify that members of each infoset share the owner's action-infoset history.

    Accepts either representation. For the augmented form the history records
    the owner's infoset at every ancestor node; for the classical form only
    the owner's decision ancestors count. Returns (True, None) or
    (False, (player, key, node_a, node_b)).
    """
    def path_ids(nodes, nid: int) -> List[int]:
        out = [nid]
        node = nodes[nid]
        while node.parent is not None:
            out.append(node.parent)
            node = nodes[node.parent]
        out.reverse()
        return out

    if isinstance(game, ExtensiveFormRep):
        def trace(player: int, nid: int) -> Tuple:
            out = []
            path = path_ids(game.nodes, nid)
            for idx in range(len(path) - 1):  # strict ancestors, root first
                ancestor = game.nodes[path[idx]]
                out.append(("I", game.infostate_keys[player][ancestor.id]))
                if ancestor.actor == player:
                    out.append(("a", game.nodes[path[idx + 1]].incoming_action))
            return tuple(out)

        partitions = game.infosets
    elif isinstance(game, ClassicalEFG):
        labels = {p: game.infoset_of(p) for p in game.players}

        def trace(player: int, nid: int) -> Tuple:
            out = []
            path = path_ids(game.nodes, nid)
            for idx in range(len(path) - 1):
                ancestor = game.nodes[path[idx]]
                if ancestor.actor == player:
                    out.append(("I", labels[player][ancestor.id]))
                    out.append(("a", game.nodes[path[idx + 1]].incoming_action))
            return tuple(out)

        partitions = game.infosets
    else:
        raise TypeError(f"unsupported game type {type(game)!r}")

    for player, cells in partitions.items():
        for key, members in cells.items():
            if len(members) < 2:
                continue
            reference = trace(player, members[0])
            for other in members[1:]:
                if trace(player, other) != reference:
                    return False, (player, key, members[0], other)
    return True, None


# ---------------------------------------------------------------------------
# Forgetting maps


def forget_nonacting(rep: ExtensiveFormRep) -> ClassicalEFG:
    """Drop the public partition and restrict each partition to the owner's decision nodes.

    Counting the public sets on each node's root path yields an exact unit-step
    timing of the result, so the output is always 1-timeable.
    """
    nodes = [
        EfgNode(id=n.id, name=f"n{n.id}", parent=n.parent, incoming_action=n.incoming_action,
                actor=n.actor, depth=n.depth, actions=n.actions,
                chance_dist=dict(n.chance_dist) if n.chance_dist else None,
                children=dict(n.children),
                utilities=n.cumulative_reward if n.actor == TERMINAL_ACTOR else None)
        for n in rep.nodes
    ]
    infosets: Dict[int, Dict[Hashable, Tuple[int, ...]]] = {}
    for p in rep.players:
        cells = {}
        for key, members in rep.infosets[p].items():
            acting = tuple(m for m in members if rep.nodes[m].actor == p)
            if acting:
                cells[key] = acting
        infosets[p] = cells
    return ClassicalEFG(num_players=rep.num_players, nodes=nodes, infosets=infosets)


def forget_factorization(spec: GameSpec) -> GameSpec:
    """Collapse the observation factoring into a partially observable game.

    Every player becomes active at every non-initial, non-terminal state with
    the single noop action where they previously had none, each player's new
    private observation is their former (private, public) pair, and the public
    observation is constantly the empty symbol. Transition, reward, and
    observation keys are unchanged.
    """
    if spec.has_chance_actor:
        spec = merge_chance(spec)
    all_players = frozenset(spec.players)
    player_fn: Dict[str, frozenset] = {}
    legal: Dict[Tuple[str, int], Tuple[str, ...]] = dict(spec.legal_actions)
    for state in spec.states:
        if state == spec.initial_state or spec.is_terminal(state):
            player_fn[state] = spec.player_fn.get(state, frozenset())
            continue
        player_fn[state] = all_players
        for p in spec.players:
            if (state, p) not in legal:
                legal[(state, p)] = (NOOP,)
    observations = {
        key: FactoredObservation(
            private=tuple((priv, obs.public) for priv in obs.private),
            public=EMPTY_PUBLIC)
        for key, obs in spec.observations.items()
    }
    return GameSpec(
        num_players=spec.num_players,
        states=spec.states,
        initial_state=spec.initial_state,
        player_fn=player_fn,
        legal_actions=legal,
        transitions=spec.transitions,
        rewards=spec.rewards,
        observations=observations,
        chance_policy=None,
    )


def posg_key(key: InfoKey) -> InfoKey:
    """Map an information-state key onto its factorization-forgetting counterpart."""
    out = []
    for el in key:
        if el[0] == "o":
            out.append(("o", (el[1], el[2]), EMPTY_PUBLIC))
        else:
            out.append(el)
    return tuple(out)


def original_key(key: InfoKey) -> InfoKey:
    """Inverse of posg_key."""
    out = []
    for el in key:
        if el[0] == "o":
            out.append(("o", el[1][0], el[1][1]))
        else:
            out.append(el)
    return tuple(out)


def posg_policy(policy):
    """Lift a policy onto the factorization-forgetting game.

    Decision infostates map through the key translation; infostates created
    by the all-players-active padding answer with the forced noop.
    """

    def lifted(player: int, key: InfoKey):
        try:
            return policy(player, original_key(key))
        except KeyError:
            return {NOOP: 1.0}

    return lifted


# ---------------------------------------------------------------------------
# Lifting a tree representation back into a tabular game


def lift_to_fosg(rep: ExtensiveFormRep) -> GameSpec:
    """Rebuild a tabular game whose unrolling reproduces ``rep``.

    Histories become world states, chance distributions become transitions,
    terminal utilities are paid on the final transition, and partition keys
    become the observation symbols. Requires perfect recall and no thick
    public sets.
    """
    ok, witness = check_perfect_recall(rep)
    if not ok:
        raise ImperfectRecall(f"representation lacks perfect recall: {witness!r}")
    thick = thick_public_set_witness(rep)
    if thick is not None:
        raise ThickPublicSets(f"public set contains node {thick[0]} and its descendant {thick[1]}")

    # Intern partition keys as compact observation symbols.
    info_symbol: Dict[int, Dict[Hashable, str]] = {}
    for p in rep.players:
        info_symbol[p] = {key: f"s{p}.{idx}" for idx, key in enumerate(rep.infosets[p])}
    pub_symbol = {key: f"pub.{idx}" for idx, key in enumerate(rep.public_sets)}

    def state_name(nid: int) -> str:
        return f"h{nid}"

    players = rep.players
    states = [state_name(n.id) for n in rep.nodes]
    player_fn: Dict[str, frozenset] = {}
    legal: Dict[Tuple[str, int], Tuple[str, ...]] = {}
    transitions: Dict[Tuple[str, JointKey], Dict[str, float]] = {}
    rewards: Dict[Tuple[str, JointKey], Tuple[float, ...]] = {}
    observations: Dict[Tuple[str, JointKey, str], FactoredObservation] = {}
    noop_joint = tuple(NOOP for _ in players)

    initial = state_name(0)
    root = rep.root
    if root.actor not in (CHANCE_ACTOR, TERMINAL_ACTOR):
        # The model requires a playerless initial state; prepend one.
        initial = "h-init"
        states.insert(0, initial)
        player_fn[initial] = frozenset()
        transitions[(initial, noop_joint)] = {state_name(0): 1.0}
        rewards[(initial, noop_joint)] = tuple(0.0 for _ in players)
        observations[(initial, noop_joint, state_name(0))] = FactoredObservation(
            private=tuple(info_symbol[p][rep.infostate_keys[p][0]] for p in players),
            public=pub_symbol[rep.public_keys[0]])

    for node in rep.nodes:
        w = state_name(node.id)
        if node.actor == TERMINAL_ACTOR:
            player_fn[w] = frozenset()
            continue
        edge_obs = {
            child_id: FactoredObservation(
                private=tuple(info_symbol[p][rep.infostate_keys[p][child_id]] for p in players),
                public=pub_symbol[rep.public_keys[child_id]])
            for child_id in node.children.values()
        }
        if node.actor == CHANCE_ACTOR:
            player_fn[w] = frozenset()
            dist = {state_name(node.children[label]): node.chance_dist[label]
                    for label in node.actions}
            transitions[(w, noop_joint)] = dist
            base = None
            for label in node.actions:
                child = rep.nodes[node.children[label]]
                reward = rep.edge_reward(child)
                if base is None:
                    base = reward
                elif any(abs(a - b) > 1e-12 for a, b in zip(base, reward)):
                    raise ValueError(f"chance node {node.id} has outcome-dependent edge rewards")
                observations[(w, noop_joint, state_name(child.id))] = edge_obs[child.id]
            rewards[(w, noop_joint)] = base if base is not None else tuple(0.0 for _ in players)
        else:
            player = node.actor
            player_fn[w] = frozenset({player})
            legal[(w, player)] = node.actions
            for label in node.actions:
                child = rep.nodes[node.children[label]]
                joint = tuple(label if p == player else NOOP for p in players)
                transitions[(w, joint)] = {state_name(child.id): 1.0}
                rewards[(w, joint)] = rep.edge_reward(child)
                observations[(w, joint, state_name(child.id))] = edge_obs[child.id]

    return GameSpec(
        num_players=rep.num_players,
        states=tuple(states),
        initial_state=initial,
        player_fn=player_fn,
        legal_actions=legal,
        transitions=transitions,
        rewards=rewards,
        observations=observations,
        chance_policy=None,
    )


# ---------------------------------------------------------------------------
# Augmenting a classical tree


def is_one_timeable(efg: ClassicalEFG) -> bool:
    """True when every classical infoset is depth-homogeneous."""
    for cells in efg.infosets.values():
        for members in cells.values():
            depths = {efg.nodes[m].depth for m in members}
            if len(depths) > 1:
                return False
    return True


def augment_classical(efg: ClassicalEFG) -> ExtensiveFormRep:
    """Extend a classical tree's partitions to all histories.

    Each node is labelled per player with either the player's own infoset, the
    parent infoset plus the connecting action, a root marker, or the nearest
    labelled ancestor plus the distance to it; equal labels form the extended
    partition. The public partition merges intersecting cells of the extended
    partitions until they are disjoint. Restricting the result to acting nodes
    reproduces the input exactly.

    Requires the input to be 1-timeable and have perfect recall.
    """
    if not is_one_timeable(efg):
        raise NotOneTimeable("classical infosets are not depth-homogeneous")
    ok, witness = check_perfect_recall(efg)
    if not ok:
        raise ImperfectRecall(f"classical tree lacks perfect recall: {witness!r}")
    for node in efg.nodes:
        if node.parent is not None and node.parent >= node.id:
            raise ValueError("node ids must be topologically ordered (parents first)")

    labels_of = {p: efg.infoset_of(p) for p in efg.players}
    keys: Dict[int, List[Hashable]] = {}
    for p in efg.players:
        per_node: List[Hashable] = [None] * len(efg.nodes)
        anchored: List[bool] = [False] * len(efg.nodes)
        for node in efg.nodes:  # ids are topologically ordered (parents first)
            parent = efg.nodes[node.parent] if node.parent is not None else None
            if node.actor == p:
                per_node[node.id] = ("dec", labels_of[p][node.id])
                anchored[node.id] = True
            elif parent is not None and parent.actor == p:
                per_node[node.id] = ("post", labels_of[p][parent.id], node.incoming_action)
                anchored[node.id] = True
            elif parent is None:
                per_node[node.id] = ("root",)
                anchored[node.id] = True
            else:
                base = parent
                dist = 1
                while not anchored[base.id]:
                    base = efg.nodes[base.parent]
                    dist += 1
                per_node[node.id] = ("dist", per_node[base.id], dist)
        keys[p] = per_node

    # Public partition: union-find over nodes, joining every extended cell.
    parent_uf = list(range(len(efg.nodes)))

    def find(x: int) -> int:
        while parent_uf[x] != x:
            parent_uf[x] = parent_uf[parent_uf[x]]
            x = parent_uf[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent_uf[max(ra, rb)] = min(ra, rb)

    cell_nodes: Dict[Tuple[int, Hashable], List[int]] = {}
    for p in efg.players:
        for node in efg.nodes:
            cell_nodes.setdefault((p, keys[p][node.id]), []).append(node.id)
    for members in cell_nodes.values():
        for other in members[1:]:
            union(members[0], other)

    pub_keys: List[Hashable] = [("pub", find(n.id)) for n in efg.nodes]

    nodes = [
        HistoryNode(id=n.id, parent=n.parent, incoming_action=n.incoming_action,
                    world_state=n.name, actor=n.actor, depth=n.depth,
                    cumulative_reward=n.utilities if n.utilities is not None
                    else tuple(0.0 for _ in efg.players),
                    actions=n.actions,
                    chance_dist=dict(n.chance_dist) if n.chance_dist else None,
                    children=dict(n.children))
        for n in efg.nodes
    ]
    infosets: Dict[int, Dict[Hashable, Tuple[int, ...]]] = {}
    for p in efg.players:
        cells: Dict[Hashable, List[int]] = {}
        for n in nodes:
            cells.setdefault(keys[p][n.id], []).append(n.id)
        infosets[p] = {k: tuple(v) for k, v in cells.items()}
    public_sets: Dict[Hashable, List[int]] = {}
    for n in nodes:
        public_sets.setdefault(pub_keys[n.id], []).append(n.id)

    return ExtensiveFormRep(
        num_players=efg.num_players,
        nodes=nodes,
        infostate_keys={p: list(keys[p]) for p in efg.players},
        infosets=infosets,
        public_keys=pub_keys,
        public_sets={k: tuple(v) for k, v in public_sets.items()},
    )


def same_classical(a: ClassicalEFG, b: ClassicalEFG) -> bool:
    """Structural equality: same tree, same utilities, same partition cells."""
    if a.num_players != b.num_players or len(a.nodes) != len(b.nodes):
        return False
    for na, nb in zip(a.nodes, b.nodes):
        if (na.parent, na.incoming_action, na.actor, na.actions) != \
                (nb.parent, nb.incoming_action, nb.actor, nb.actions):
            return False
        if (na.chance_dist or None) != (nb.chance_dist or None):
            return False
        if na.utilities != nb.utilities:
            return False
    for p in a.players:
        cells_a = {frozenset(m) for m in a.infosets[p].values()}
        cells_b = {frozenset(m) for m in b.infosets[p].values()}
        if cells_a != cells_b:
            return False
    return True


def reps_isomorphic(a: ExtensiveFormRep, b: ExtensiveFormRep, atol: float = 1e-9) -> bool:
    """Isomorphism via the world-state bijection left behind by lift_to_fosg.

    ``b`` is expected to be the unrolling of ``lift_to_fosg(a)``: its world
    states name nodes of ``a``. Checks tree structure, actors, probabilities,
    rewards, and that every partition maps cell-for-cell.
    """
    mapping: Dict[int, int] = {}
    for node in b.nodes:
        w = node.world_state
        if w is None or not w.startswith("h") or w == "h-init":
            return False
        mapping[int(w[1:])] = node.id
    if len(mapping) != len(a.nodes) or len(b.nodes) != len(a.nodes):
        return False
    for node in a.nodes:
        image = b.nodes[mapping[node.id]]
        if node.actor != image.actor or len(node.children) != len(image.children):
            return False
        if any(abs(x - y) > atol for x, y in zip(node.cumulative_reward, image.cumulative_reward)):
            return False
        if node.actor == CHANCE_ACTOR:
            # Chance outcome labels in b are the lifted successor-state names.
            for label, cid in node.children.items():
                lifted = f"h{cid}"
                if lifted not in image.children or image.children[lifted] != mapping[cid]:
                    return False
                if abs(image.chance_dist[lifted] - node.chance_dist[label]) > atol:
                    return False
        else:
            for label, cid in node.children.items():
                if label not in image.children or image.children[label] != mapping[cid]:
                    return False
    for p in a.players:
        cells_a = {frozenset(mapping[m] for m in members) for members in a.infosets[p].values()}
        cells_b = {frozenset(members) for members in b.infosets[p].values()}
        if cells_a != cells_b:
            return False
    cells_a = {frozenset(mapping[m] for m in members) for members in a.public_sets.values()}
    cells_b = {frozenset(members) for members in b.public_sets.values()}
    return cells_a == cells_b
