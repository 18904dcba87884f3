"""Shared pytest hooks.

The acceptance tests record one verdict line each; the lines are replayed in
the terminal summary so a plain ``pytest -v`` run shows every criterion's
outcome even though passing tests normally swallow their stdout.
"""
from typing import List

ACCEPTANCE_LINES: List[str] = []


def record_criterion(number: int, name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {number:2d} ({name})"
    if detail:
        line += f": {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
