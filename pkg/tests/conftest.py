import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report(request):
    """Print one acceptance line immediately and again in the end-of-run summary."""
    tr = request.config.pluginmanager.getplugin("terminalreporter")

    def emit(criterion, passed, detail):
        status = passed if isinstance(passed, str) else ("PASS" if passed else "FAIL")
        line = f"criterion {criterion:>3}: {status:<7} {detail}"
        ACCEPTANCE_LINES.append(line)
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        return passed

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
