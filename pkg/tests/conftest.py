import sys

import pytest
from hypothesis import HealthCheck, settings

from mucalc import disjoint_union, enumerate_ltss, random_lts

settings.register_profile(
    "repo", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


def sample_union(seed, count=12, max_states=5, actions=("a", "b"), props=("p", "q")):
    """One LTS holding ``count`` random systems side by side."""
    return disjoint_union([random_lts(seed * 101 + k, max_states, actions, props)
                           for k in range(count)])


@pytest.fixture(scope="session")
def small_union():
    """All LTSs with at most 3 states over one action and one proposition."""
    return disjoint_union(list(enumerate_ltss(3, ("a",), ("p",))))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
