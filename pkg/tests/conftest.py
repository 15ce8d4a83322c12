import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fuzzytcp import io as fio  # noqa: E402


@pytest.fixture(scope="session")
def engine():
    return fio.build_engine()


@pytest.fixture(scope="session")
def variables(engine):
    return engine.variables


@pytest.fixture(scope="session")
def dataset():
    return fio.default_dataset()


@pytest.fixture(scope="session")
def ranked(dataset, engine):
    from fuzzytcp.tcp import prioritize

    return prioritize(dataset, engine)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
