from importlib import resources

import pytest


def data_path(name: str) -> str:
    return str(resources.files("foldkit") / "data" / name)


@pytest.fixture
def data():
    return data_path


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
