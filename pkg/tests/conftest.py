import pytest

from flexsector.scenarios import scenario_distribution_I, scenario_distribution_II

ACCEPTANCE_LINES = []


def record_acceptance(label, passed, detail=""):
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def dist1():
    return scenario_distribution_I()


@pytest.fixture
def dist2():
    return scenario_distribution_II()


@pytest.fixture
def dist1_profile(dist1):
    return dist1.profile
