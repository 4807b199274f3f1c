import math

import pytest

from powerinterp.globalmap import GlobalMap
from powerinterp.sequences import generate_standard_family

ROOT_CONFIGS = __import__("pathlib").Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def standard4():
    return generate_standard_family(2, 2, 4)


@pytest.fixture(scope="session")
def standard3():
    return generate_standard_family(2, 2, 3)


@pytest.fixture(scope="session")
def gm4(standard4):
    return GlobalMap(standard4)


@pytest.fixture(scope="session")
def configs():
    return ROOT_CONFIGS


PI = math.pi


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def log(line):
        print(line)
        lines.append(line)
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda x: int(x.split()[1])):
            terminalreporter.write_line(line)
