import pytest

from tauberlab.games import bundled_games, go_to_good, matching_pennies_chain


@pytest.fixture(scope="session")
def bundled():
    return bundled_games()


@pytest.fixture
def good():
    return go_to_good()


@pytest.fixture
def pennies():
    return matching_pennies_chain()


def single_state(cost=0.5):
    return {
        "name": "single",
        "states": ["s0"],
        "cost": {"s0": cost},
        "actions": {"s0": {"max": ["a"], "min": ["b"]}},
        "transitions": {"s0": {"a": {"b": {"s0": 1.0}}}},
    }


def path_game(costs):
    """Deterministic one-action chain over states named after their index."""
    states = [f"p{i}" for i in range(len(costs))]
    return {
        "name": "path",
        "states": states,
        "cost": dict(zip(states, costs)),
        "actions": {s: {"max": ["a"], "min": ["b"]} for s in states},
        "transitions": {s: {"a": {"b": {s: 1.0}}} for s in states},
    }


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
