"""Acceptance reporting: one PASS/FAIL line per criterion at session end."""

from __future__ import annotations

import re

import pytest

CRITERIA = {
    1: "SAT to FMP equisatisfiability",
    2: "canonical CMP encoding round-trip",
    3: "CMP-SAT separation from classical families",
    4: "recognition walk-through",
    5: "fragment logic end-to-end",
    6: "normal forms",
    7: "symmetric marriage",
    8: "half-fraction hardness gadget",
    9: "Hall certificates",
}

_results: dict[int, list[str]] = {}
_PATTERN = re.compile(r"test_criterion_(\d+)_")


def pytest_runtest_logreport(report: pytest.TestReport) -> None:
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        _results.setdefault(int(m.group(1)), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter) -> None:
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        outcomes = _results.get(n)
        if outcomes is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {n} [{title}]: {status}")
