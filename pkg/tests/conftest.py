import pytest

from cmselect.scenario_io import bundled_path, load_scenario

NA = None

SERVICES = ["Service1", "Service2", "Service3", "Service4", "Service5"]
THREATS = [f"Threat{k}" for k in range(1, 11)]

# Printed "Assessed Dangerousness Matrix", rows Threat1..Threat10.
TABLE1 = [
    [40, 40, 8, 32, 24],
    [60, 60, NA, NA, NA],
    [NA, NA, 5, 32, 24],
    [NA, 100, NA, NA, NA],
    [NA, NA, NA, NA, 48],
    [100, 100, 13, 80, 60],
    [60, 60, 8, 36, 36],
    [NA, 27, 0, NA, NA],
    [80, NA, NA, NA, NA],
    [60, 60, 8, 48, 36],
]

# Printed "Actual Danger Matrix".
TABLE3 = [
    [40, 40, 8, 32, 24],
    [-15, -15, NA, NA, NA],
    [NA, NA, -55, -28, -36],
    [NA, 100, NA, NA, NA],
    [NA, NA, NA, NA, 8],
    [0, 0, -87, -20, -40],
    [10, 60, -42, 36, -14],
    [NA, 27, 0, NA, NA],
    [80, NA, NA, NA, NA],
    [-30, -30, -82, -42, -54],
]

USER_THREAT = "User workstation compromise"
USER_SERVICE = "User service"
USER_TARGET = (USER_THREAT, USER_SERVICE)


@pytest.fixture(scope="session")
def usecase_path():
    return bundled_path("usecase_cassidian.json")


@pytest.fixture(scope="session")
def tables_path():
    return bundled_path("tables_example.json")


@pytest.fixture(scope="session")
def rated_path():
    return bundled_path("usecase_rated_ale.json")


@pytest.fixture(scope="session")
def usecase(usecase_path):
    return load_scenario(usecase_path)


@pytest.fixture(scope="session")
def tables(tables_path):
    return load_scenario(tables_path)


# Acceptance criteria record one line each; printed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
