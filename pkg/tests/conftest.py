"""Shared fixtures: verdict lines for the acceptance criteria."""
import time

import pytest


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it.

    Usage: ``verdict(number, ok, detail, budget=seconds)``.  The elapsed time
    since the test started is checked against ``budget`` when given.
    """
    start = time.perf_counter()

    def record(number, ok, detail, budget=None):
        elapsed = time.perf_counter() - start
        within = budget is None or elapsed < budget
        passed = bool(ok) and within
        timing = f"{elapsed:.2f}s" + (f" of {budget:g}s" if budget is not None else "")
        line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}  [{timing}]"
        request.config.acceptance_lines.append(line)
        print(line)
        assert ok, line
        assert within, f"criterion {number} exceeded its runtime budget: {timing}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
