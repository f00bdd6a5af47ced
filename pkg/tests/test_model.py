"""Model axioms, stepping, chance merging, and serialization."""

import random

import pytest
from hypothesis import given, settings, strategies as st

import fosg
from fosg.errors import IllegalAction, MissingChancePolicy, StepAtTerminal
from fosg.model import (NOOP, expected_utilities, serial_policy, uniform_spec_policy,
                        sample_chance_action)

import oracles


def test_kuhn_validates_clean(kuhn_spec):
    assert fosg.validate(kuhn_spec) == []


def test_initial_state_with_players_is_flagged(kuhn_spec):
    broken = fosg.GameSpec(
        num_players=kuhn_spec.num_players,
        states=kuhn_spec.states,
        initial_state=kuhn_spec.initial_state,
        player_fn={**kuhn_spec.player_fn, "deal": frozenset({1})},
        legal_actions={**kuhn_spec.legal_actions, ("deal", 1): ("x",)},
        transitions=kuhn_spec.transitions,
        rewards=kuhn_spec.rewards,
        observations=kuhn_spec.observations,
    )
    codes = {v.code for v in fosg.validate(broken)}
    assert "initial-state-active" in codes


def test_missing_observation_is_flagged(kuhn_spec):
    observations = dict(kuhn_spec.observations)
    dropped = next(iter(observations))
    del observations[dropped]
    broken = fosg.GameSpec(
        num_players=kuhn_spec.num_players,
        states=kuhn_spec.states,
        initial_state=kuhn_spec.initial_state,
        player_fn=kuhn_spec.player_fn,
        legal_actions=kuhn_spec.legal_actions,
        transitions=kuhn_spec.transitions,
        rewards=kuhn_spec.rewards,
        observations=observations,
    )
    violations = fosg.validate(broken)
    assert any(v.code == "undefined-observation" for v in violations)


def test_cycle_is_flagged():
    spec = fosg.GameSpec(
        num_players=1,
        states=("a", "b"),
        initial_state="a",
        player_fn={"a": frozenset(), "b": frozenset()},
        legal_actions={},
        transitions={("a", (NOOP,)): {"b": 1.0}, ("b", (NOOP,)): {"a": 1.0}},
        rewards={("a", (NOOP,)): (0.0,), ("b", (NOOP,)): (0.0,)},
        observations={
            ("a", (NOOP,), "b"): fosg.FactoredObservation(("x",), "x"),
            ("b", (NOOP,), "a"): fosg.FactoredObservation(("y",), "y"),
        },
    )
    assert any(v.code == "cycle" for v in fosg.validate(spec))


def test_step_initial_matching_pennies(pennies_spec):
    rng = random.Random(0)
    nxt, reward, obs = fosg.step(pennies_spec, "start", (NOOP, NOOP), rng)
    assert nxt == "play"
    assert reward == (0.0, 0.0)
    assert obs.public == "begin"


def test_step_kuhn_deal_frequencies(kuhn_spec):
    rng = random.Random(7)
    counts = {}
    noop = (NOOP, NOOP)
    for _ in range(60000):
        nxt, _, _ = fosg.step(kuhn_spec, "deal", noop, rng)
        counts[nxt] = counts.get(nxt, 0) + 1
    assert set(counts) == set(kuhn_spec.transitions[("deal", noop)])
    expected = 60000 / 6
    chi_square = sum((n - expected) ** 2 / expected for n in counts.values())
    assert chi_square < 40.0  # 5 degrees of freedom, far beyond any sane quantile


def test_step_never_leaves_declared_support(kuhn_spec):
    rng = random.Random(3)
    noop = (NOOP, NOOP)
    support = {s for s, p in kuhn_spec.transitions[("deal", noop)].items() if p > 0}
    for _ in range(500):
        nxt, _, _ = fosg.step(kuhn_spec, "deal", noop, rng)
        assert nxt in support


def test_step_at_terminal_raises(kuhn_spec):
    with pytest.raises(StepAtTerminal):
        fosg.step(kuhn_spec, "JQ:kk$", (NOOP, NOOP), random.Random(0))


def test_step_illegal_action_raises(kuhn_spec):
    with pytest.raises(IllegalAction):
        fosg.step(kuhn_spec, "JQ:", ("fold", NOOP), random.Random(0))
    with pytest.raises(IllegalAction):
        fosg.step(kuhn_spec, "JQ:", ("check", "check"), random.Random(0))


# --- chance merging ---


def test_merge_chance_identity_without_chance(kuhn_spec):
    assert fosg.merge_chance(kuhn_spec) is kuhn_spec


def test_merge_chance_variant_equals_base(kuhn_spec):
    variant = fosg.kuhn_poker_chance_variant()
    assert fosg.validate(variant) == []
    merged = fosg.merge_chance(variant)
    assert merged == kuhn_spec


def test_merge_chance_unrolled_trees_agree(kuhn_spec, kuhn_rep):
    merged_rep = fosg.unroll(fosg.merge_chance(fosg.kuhn_poker_chance_variant()))
    assert len(merged_rep.nodes) == len(kuhn_rep.nodes)
    for a, b in zip(merged_rep.nodes, kuhn_rep.nodes):
        assert a.world_state == b.world_state
        assert a.actor == b.actor
        assert a.cumulative_reward == pytest.approx(b.cumulative_reward, abs=1e-12)
        if a.chance_dist is not None:
            assert a.chance_dist == pytest.approx(b.chance_dist, abs=1e-12)


def test_merge_chance_missing_policy():
    variant = fosg.kuhn_poker_chance_variant()
    broken = fosg.GameSpec(
        num_players=variant.num_players,
        states=variant.states,
        initial_state=variant.initial_state,
        player_fn=variant.player_fn,
        legal_actions=variant.legal_actions,
        transitions=variant.transitions,
        rewards=variant.rewards,
        observations=variant.observations,
        chance_policy={},
    )
    with pytest.raises(MissingChancePolicy):
        fosg.merge_chance(broken)


def test_sample_chance_action_matches_policy():
    variant = fosg.kuhn_poker_chance_variant()
    rng = random.Random(11)
    seen = {sample_chance_action(variant, "deal", rng) for _ in range(2000)}
    assert seen == set(variant.chance_policy["deal"])


# --- serialization ---


def test_serialize_keeps_serial_game(kuhn_spec):
    assert fosg.is_serial(kuhn_spec)
    assert fosg.serialize(kuhn_spec) is kuhn_spec


def test_serialize_matching_pennies_layer_counts(pennies_spec):
    assert not fosg.is_serial(pennies_spec)
    serial = fosg.serialize(pennies_spec)
    assert fosg.is_serial(serial)
    assert fosg.validate(serial) == []
    decision_first = [s for s in serial.states if s == "play"]
    decision_later = [s for s in serial.states if s.startswith("play[2|")]
    resolution = [s for s in serial.states if s.startswith("play[c|")]
    assert len(decision_first) == 1
    assert len(decision_later) == 2
    assert len(resolution) == 4


def test_is_serial_on_terminal_only_game():
    spec = fosg.GameSpec(
        num_players=1, states=("end",), initial_state="end",
        player_fn={"end": frozenset()}, legal_actions={}, transitions={},
        rewards={}, observations={})
    assert fosg.is_serial(spec)
    assert fosg.validate(spec) == []


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_serialize_always_yields_serial(seed):
    spec = fosg.random_fosg(seed, serial=False, depth=3)
    assert fosg.is_serial(fosg.serialize(spec))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=500))
def test_serialize_preserves_expected_utilities(seed):
    spec = fosg.random_fosg(seed, serial=False, depth=3)
    serial = fosg.serialize(spec)
    policy = uniform_spec_policy(spec)
    base = expected_utilities(spec, policy)
    lifted = expected_utilities(serial, serial_policy(policy))
    assert base == pytest.approx(lifted, abs=1e-12)


def test_serialize_preserves_pennies_value_for_random_policies(pennies_spec):
    rng = random.Random(5)
    serial = fosg.serialize(pennies_spec)
    for _ in range(20):
        table = {
            p: {(("o", "-", "begin"),): _random_dist(rng, ("heads", "tails"))}
            for p in (1, 2)
        }
        policy = lambda p, k, table=table: table[p][k]
        base = expected_utilities(pennies_spec, policy)
        lifted = expected_utilities(serial, serial_policy(policy))
        assert base == pytest.approx(lifted, abs=1e-12)


def _random_dist(rng, actions):
    raw = [rng.random() + 1e-3 for _ in actions]
    total = sum(raw)
    return {a: r / total for a, r in zip(actions, raw)}


# --- kuhn value sanity against the enumeration oracle ---


def test_uniform_value_matches_enumeration(kuhn_rep):
    profile = fosg.uniform_profile(kuhn_rep)
    enumerated = oracles.expected_utility_by_enumeration(kuhn_rep, profile)
    assert fosg.game_value(kuhn_rep, profile) == pytest.approx(enumerated, abs=1e-12)
