import pytest

from layered_hls import benchmarks
from layered_hls.macrodb import MacroDatabase
from layered_hls.pipeline import register_operators


@pytest.fixture(scope="session")
def bench_programs():
    return {name: benchmarks.load(name) for name in benchmarks.NAMES}


@pytest.fixture(scope="session")
def conv_db(bench_programs):
    db = MacroDatabase()
    register_operators(bench_programs["single"], db)
    return db


@pytest.fixture(scope="session")
def bench_path():
    return {name: str(benchmarks.path(name)) for name in benchmarks.NAMES}


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2])):
            terminalreporter.write_line(line)
