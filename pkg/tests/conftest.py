import pytest

from attractor_control.network import RegulatoryNetwork, Threshold, TruthTable


def copy_rule(j):
    return TruthTable((j,), (0, 1))


def not_rule(j):
    return TruthTable((j,), (1, 0))


def or_rule(*js):
    return TruthTable.from_function(js, any)


@pytest.fixture
def net_a():
    """x1 and x2 hold themselves, x3 = x1 or x2."""
    return RegulatoryNetwork([copy_rule(0), copy_rule(1), or_rule(0, 1)])


@pytest.fixture
def mutual_copy():
    return RegulatoryNetwork([copy_rule(1), copy_rule(0)])


@pytest.fixture
def negation_loop():
    return RegulatoryNetwork([not_rule(0)])


@pytest.fixture
def oscillator():
    """x1' = not x2, x2' = x1: a period-4 cycle."""
    return RegulatoryNetwork([not_rule(1), copy_rule(0)])


@pytest.fixture
def excitatory_pair():
    return RegulatoryNetwork([Threshold((1,), (1,), 1), Threshold((0,), (1,), 1)])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance scorecard")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
