from importlib import resources
from pathlib import Path

import pytest

from uniband.costs import load_costbook


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return Path(str(resources.files("uniband.data").joinpath("fixture")))


@pytest.fixture(scope="session")
def costbook():
    return load_costbook()


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
