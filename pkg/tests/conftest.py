import shutil
import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

FIXTURES = TESTS / "fixtures"
CASES_DIR = FIXTURES / "cases"
GCC = shutil.which("gcc")

needs_gcc = pytest.mark.skipif(GCC is None, reason="no external C compiler on PATH")


def expected_line(path: Path) -> int:
    """Line carrying the `expect-error` marker."""
    for i, line in enumerate(path.read_text().splitlines(), 1):
        if "expect-error" in line:
            return i
    raise AssertionError(f"{path} has no expect-error marker")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
