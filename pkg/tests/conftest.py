import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from decs.models import transfer_line, transfer_line_path  # noqa: E402


@pytest.fixture(scope="session")
def line():
    return transfer_line()


@pytest.fixture(scope="session")
def line_file():
    return transfer_line_path()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
