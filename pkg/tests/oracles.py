"""Independent reference computations the tests check the library against.

Everything here is deliberately naive: plain enumeration over terminals,
exhaustive search over pure policies, and a hand-rolled Kuhn settlement.
None of it shares code with the solvers it cross-checks.
"""

import itertools

CARDS = ("J", "Q", "K")
KUHN_LINES = ("kk", "kbf", "kbc", "bf", "bc")


def kuhn_deals():
    return [(a, b) for a in CARDS for b in CARDS if a != b]


def kuhn_settlement(card1, card2, line):
    """Net payoff for player 1 given the betting line, from first principles."""
    win = 1 if CARDS.index(card1) > CARDS.index(card2) else -1
    if line == "kk":
        return win * 1
    if line == "kbf":
        return -1
    if line == "kbc":
        return win * 2
    if line == "bf":
        return 1
    if line == "bc":
        return win * 2
    raise ValueError(line)


def kuhn_terminal_count():
    return len(kuhn_deals()) * len(KUHN_LINES)


def kuhn_infoset_count():
    # Decision points: player 1 at the start and facing a bet after checking,
    # player 2 after a check and after a bet; three private cards each.
    return {1: len(CARDS) * 2, 2: len(CARDS) * 2}


def terminal_reach_value(rep, profile, terminal):
    """P(z) * utility by walking one terminal's path with explicit products."""
    path = []
    node = terminal
    while node.parent is not None:
        path.append(node)
        node = rep.nodes[node.parent]
    prob = 1.0
    for child in reversed(path):
        parent = rep.nodes[child.parent]
        if parent.chance_dist is not None:
            prob *= parent.chance_dist[child.incoming_action]
        else:
            key = rep.infostate_keys[parent.actor][parent.id]
            prob *= profile[parent.actor][key][child.incoming_action]
    return prob, terminal.cumulative_reward


def expected_utility_by_enumeration(rep, profile):
    """Expected utility vector as a plain sum over all terminals."""
    totals = [0.0] * rep.num_players
    for z in rep.terminals():
        prob, utility = terminal_reach_value(rep, profile, z)
        for i in range(rep.num_players):
            totals[i] += prob * utility[i]
    return tuple(totals)


def pure_policies(rep, player):
    """Every deterministic policy of one player, as key -> action dicts."""
    infosets = rep.acting_infosets(player)
    keys = list(infosets)
    action_sets = [rep.infoset_actions(player, k) for k in keys]
    for combo in itertools.product(*action_sets):
        yield {k: {a: 1.0 if a == chosen else 0.0 for a in acts}
               for k, acts, chosen in zip(keys, action_sets, combo)}


def best_response_by_enumeration(rep, profile, player):
    """Best pure-policy value for one player by exhaustive search."""
    best = None
    for pure in pure_policies(rep, player):
        candidate = dict(profile)
        candidate[player] = pure
        value = expected_utility_by_enumeration(rep, candidate)[player - 1]
        if best is None or value > best:
            best = value
    return best
