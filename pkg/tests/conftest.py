import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE = []


def record(k: int, name: str, ok: bool, detail: str, seconds: float = None):
    """Print one PASS/FAIL line for an acceptance criterion and keep it for the summary."""
    line = f"criterion {k:2d} {'PASS' if ok else 'FAIL'}: {name}: {detail}"
    if seconds is not None:
        line += f" ({seconds:.1f} s)"
    ACCEPTANCE.append((k, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
