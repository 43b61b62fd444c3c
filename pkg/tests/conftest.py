from __future__ import annotations

import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Append one PASS/FAIL line for an acceptance criterion."""

    def record(number: int, title: str, passed: bool, seconds: float, note: str = "") -> None:
        tail = f"  {note}" if note else ""
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title}  ({seconds:.1f}s){tail}"
        request.config._acceptance_lines.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
