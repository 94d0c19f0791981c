from __future__ import annotations

import pytest

from dss.config import PayoffSpec
from dss.policy import build_mdp, value_iteration


def reduced_spec() -> PayoffSpec:
    """Tiny instance where brute-force tree enumeration stays affordable and
    the shortened clock keeps the action choice nontrivial."""
    return PayoffSpec(n_bombs=3, episode_time_limit=60.0, time_cuts=(20.0, 40.0))


@pytest.fixture(scope="session")
def default_spec() -> PayoffSpec:
    return PayoffSpec()


@pytest.fixture(scope="session")
def small_spec() -> PayoffSpec:
    return reduced_spec()


@pytest.fixture(scope="session")
def default_mdp(default_spec):
    return build_mdp(default_spec)


@pytest.fixture(scope="session")
def default_policy(default_mdp):
    return value_iteration(default_mdp)


@pytest.fixture(scope="session")
def small_mdp(small_spec):
    return build_mdp(small_spec)


@pytest.fixture(scope="session")
def small_policy(small_mdp):
    return value_iteration(small_mdp)
