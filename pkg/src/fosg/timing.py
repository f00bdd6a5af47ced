"""Exact timings of classical game trees and padding to unit-step form.

A timing labels every node with a non-negative integer such that children
exceed parents by at least one and members of a classical infoset share a
label. Timings are found by collapsing infoset-equality classes and taking
longest paths from the root in the collapsed constraint graph; when the
collapsed graph is cyclic the game admits no exact timing and a constraint
cycle alternating tree edges with infoset equalities is produced as witness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Hashable, List, Optional, Tuple

from .errors import InvalidTiming
from .unroll import ClassicalEFG, EfgNode

WitnessStep = Tuple  # ("edge", parent, child) | ("infoset", a, b, player, key)


@dataclass
class Timing:
    """Node labels of an exact deterministic timing."""

    labels: Dict[int, int]

    def tau(self, efg: ClassicalEFG, child_id: int) -> int:
        """Time stamps skipped on the edge into ``child_id``."""
        child = efg.nodes[child_id]
        return self.labels[child_id] - self.labels[child.parent] - 1


def validate_timing(efg: ClassicalEFG, timing: Timing) -> List[str]:
    """All timing-constraint violations of ``timing`` on ``efg`` (empty = valid)."""
    problems = []
    labels = timing.labels
    for node in efg.nodes:
        label = labels.get(node.id)
        if label is None:
            problems.append(f"node {node.id} has no label")
            continue
        if not isinstance(label, int) or label < 0:
            problems.append(f"node {node.id} has non-integer or negative label {label!r}")
            continue
        if node.parent is not None and label < labels.get(node.parent, 0) + 1:
            problems.append(f"edge into node {node.id} advances by less than one")
    for player, cells in efg.infosets.items():
        for key, members in cells.items():
            values = {labels.get(m) for m in members}
            if len(values) > 1:
                problems.append(f"infoset {key!r} of player {player} has mixed labels {sorted(values)}")
    return problems


def normalize_labels(labels: Dict[int, int]) -> Dict[int, int]:
    """Compress label values to consecutive integers starting at zero.

    Keeps every ordering relation, so an exact timing stays exact and the
    largest label becomes at most one less than the node count.
    """
    distinct = sorted(set(labels.values()))
    rank = {v: i for i, v in enumerate(distinct)}
    return {nid: rank[v] for nid, v in labels.items()}


def _union_find(efg: ClassicalEFG) -> List[int]:
    parent = list(range(len(efg.nodes)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for cells in efg.infosets.values():
        for members in cells.values():
            for other in members[1:]:
                ra, rb = find(members[0]), find(other)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    return [find(i) for i in range(len(efg.nodes))]


def _cell_lookup(efg: ClassicalEFG) -> Dict[int, List[Tuple[int, Hashable, Tuple[int, ...]]]]:
    by_node: Dict[int, List[Tuple[int, Hashable, Tuple[int, ...]]]] = {}
    for player, cells in efg.infosets.items():
        for key, members in cells.items():
            for m in members:
                by_node.setdefault(m, []).append((player, key, members))
    return by_node


def _equality_path(efg: ClassicalEFG, start: int, goal: int) -> List[WitnessStep]:
    """Connect two nodes of one collapsed class through shared infoset cells."""
    if start == goal:
        return []
    by_node = _cell_lookup(efg)
    prev: Dict[int, Tuple[int, int, Hashable]] = {}
    seen = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for player, key, members in by_node.get(current, ()):
            for other in members:
                if other not in seen:
                    seen.add(other)
                    prev[other] = (current, player, key)
                    if other == goal:
                        queue.clear()
                        break
                    queue.append(other)
    steps: List[WitnessStep] = []
    node = goal
    while node != start:
        source, player, key = prev[node]
        steps.append(("infoset", source, node, player, key))
        node = source
    steps.reverse()
    return steps


def find_exact_timing(efg: ClassicalEFG) -> Tuple[Optional[Timing], Optional[List[WitnessStep]]]:
    """Longest-path exact timing, or a constraint cycle when none exists.

    Returns ``(timing, None)`` with normalized consecutive labels, or
    ``(None, witness)`` where the witness alternates tree edges with infoset
    equalities and closes on itself.
    """
    roots = _union_find(efg)
    n_nodes = len(efg.nodes)

    edges: Dict[int, Dict[int, Tuple[int, int]]] = {}
    for node in efg.nodes:
        if node.parent is None:
            continue
        su, sv = roots[node.parent], roots[node.id]
        if su == sv:
            # The edge forces +1 inside a class forced equal: a minimal cycle.
            witness: List[WitnessStep] = [("edge", node.parent, node.id)]
            witness += _equality_path(efg, node.id, node.parent)
            return None, witness
        edges.setdefault(su, {}).setdefault(sv, (node.parent, node.id))

    supers = sorted(set(roots))
    indeg = {s: 0 for s in supers}
    for su, targets in edges.items():
        for sv in targets:
            indeg[sv] += 1
    queue = deque(s for s in supers if indeg[s] == 0)
    topo: List[int] = []
    while queue:
        s = queue.popleft()
        topo.append(s)
        for sv in edges.get(s, ()):
            indeg[sv] -= 1
            if indeg[sv] == 0:
                queue.append(sv)

    if len(topo) < len(supers):
        return None, _extract_cycle(efg, roots, edges)

    dist = {s: 0 for s in supers}
    for s in topo:
        for sv in edges.get(s, ()):
            dist[sv] = max(dist[sv], dist[s] + 1)
    labels = normalize_labels({node.id: dist[roots[node.id]] for node in efg.nodes})
    return Timing(labels=labels), None


def _extract_cycle(efg: ClassicalEFG, roots: List[int],
                   edges: Dict[int, Dict[int, Tuple[int, int]]]) -> List[WitnessStep]:
    # Find a supernode cycle by iterative DFS, then stitch the witness chain.
    color: Dict[int, int] = {}
    stack_path: List[int] = []
    cycle: Optional[List[int]] = None

    def dfs(start: int) -> Optional[List[int]]:
        stack = [(start, iter(edges.get(start, ())))]
        color[start] = 1
        stack_path.append(start)
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color.get(nxt) == 1:
                    return stack_path[stack_path.index(nxt):] + [nxt]
                if color.get(nxt, 0) == 0:
                    color[nxt] = 1
                    stack_path.append(nxt)
                    stack.append((nxt, iter(edges.get(nxt, ()))))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                stack_path.pop()
                color[node] = 2
        return None

    for s in sorted(edges):
        if color.get(s, 0) == 0:
            cycle = dfs(s)
            if cycle:
                break
    assert cycle is not None, "collapsed graph reported cyclic but no cycle found"

    steps: List[WitnessStep] = []
    first_edge = edges[cycle[0]][cycle[1]]
    entry = first_edge[0]
    current = entry
    for idx in range(len(cycle) - 1):
        su, sv = cycle[idx], cycle[idx + 1]
        parent, child = edges[su][sv]
        steps += _equality_path(efg, current, parent)
        steps.append(("edge", parent, child))
        current = child
    steps += _equality_path(efg, current, entry)
    return steps


def verify_witness(efg: ClassicalEFG, witness: List[WitnessStep]) -> bool:
    """Check that a witness is a genuine closed chain of violated constraints."""
    if not witness:
        return False
    edge_steps = 0
    for step in witness:
        if step[0] == "edge":
            _tag, parent, child = step
            if efg.nodes[child].parent != parent:
                return False
            edge_steps += 1
        elif step[0] == "infoset":
            _tag, a, b, player, key = step
            members = efg.infosets.get(player, {}).get(key)
            if members is None or a not in members or b not in members:
                return False
        else:
            return False
    for prev, nxt in zip(witness, witness[1:]):
        if prev[2] != nxt[1]:
            return False
    if witness[-1][2] != witness[0][1]:
        return False
    return edge_steps > 0


def witness_nodes(witness: List[WitnessStep]) -> List[int]:
    """Distinct nodes touched by a witness, in chain order."""
    seen = []
    for step in witness:
        for nid in (step[1], step[2]):
            if nid not in seen:
                seen.append(nid)
    return seen


def pad_to_1_timeable(efg: ClassicalEFG, timing: Timing) -> ClassicalEFG:
    """Insert single-action chance nodes until every transition takes one step.

    An edge whose timing labels differ by 1 + t gains t pad nodes. The output
    has exactly the input's node count plus the summed skips, identical
    strategy spaces, and unchanged expected utilities.
    """
    problems = validate_timing(efg, timing)
    if problems:
        raise InvalidTiming("; ".join(problems))

    nodes: List[EfgNode] = []
    remap: Dict[int, int] = {}
    pad_counter: Dict[int, int] = {}

    def copy_node(old: EfgNode, parent_new: Optional[int], action: Optional[str],
                  depth: int) -> int:
        nid = len(nodes)
        nodes.append(EfgNode(id=nid, name=old.name, parent=parent_new,
                             incoming_action=action, actor=old.actor, depth=depth,
                             actions=old.actions,
                             chance_dist=dict(old.chance_dist) if old.chance_dist else None,
                             utilities=old.utilities))
        remap[old.id] = nid
        if parent_new is not None:
            nodes[parent_new].children[action] = nid
        return nid

    queue = deque()
    copy_node(efg.nodes[0], None, None, 0)
    queue.append(efg.nodes[0].id)
    total_tau = 0
    while queue:
        old_id = queue.popleft()
        old = efg.nodes[old_id]
        for action in old.actions:
            child = efg.nodes[old.children[action]]
            tau = timing.tau(efg, child.id)
            total_tau += tau
            attach_id = remap[old_id]
            attach_action = action
            for k in range(tau):
                pad_counter[remap[old_id]] = pad_counter.get(remap[old_id], 0) + 1
                pid = len(nodes)
                nodes.append(EfgNode(
                    id=pid, name=f"pad/{old.name}/{pad_counter[remap[old_id]]}",
                    parent=attach_id, incoming_action=attach_action, actor=0,
                    depth=nodes[attach_id].depth + 1, actions=("noop",),
                    chance_dist={"noop": 1.0}))
                nodes[attach_id].children[attach_action] = pid
                attach_id = pid
                attach_action = "noop"
            copy_node(child, attach_id, attach_action, nodes[attach_id].depth + 1)
            queue.append(child.id)

    assert len(nodes) == len(efg.nodes) + total_tau
    infosets = {
        player: {key: tuple(remap[m] for m in members) for key, members in cells.items()}
        for player, cells in efg.infosets.items()
    }
    return ClassicalEFG(num_players=efg.num_players, nodes=nodes, infosets=infosets)
