"""Shared fixtures: fixture games are deterministic, so build them once."""

import pytest

import fosg


@pytest.fixture(scope="session")
def kuhn_spec():
    return fosg.kuhn_poker()


@pytest.fixture(scope="session")
def kuhn_rep(kuhn_spec):
    return fosg.unroll(kuhn_spec)


@pytest.fixture(scope="session")
def kuhn_efg(kuhn_rep):
    return fosg.forget_nonacting(kuhn_rep)


@pytest.fixture(scope="session")
def pennies_spec():
    return fosg.matching_pennies()


@pytest.fixture(scope="session")
def pennies_rep(pennies_spec):
    return fosg.unroll(fosg.serialize(pennies_spec))
