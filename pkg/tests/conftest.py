"""Suite-wide pytest configuration.

Adds a terminal-summary block that prints one PASS/FAIL line per
acceptance criterion (the tests in test_acceptance.py), so the outcome
of each criterion is visible at a glance at the end of a run.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

# Make sibling helper modules (treegen) importable from every test file.
sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_LABELS: dict[str, str] = {}
_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if "test_acceptance.py" not in str(item.fspath):
            continue
        doc = (item.function.__doc__ or item.name).strip()
        _ACCEPTANCE_LABELS[item.nodeid] = doc.splitlines()[0].rstrip(".")


def pytest_runtest_logreport(report):
    if report.nodeid not in _ACCEPTANCE_LABELS:
        return
    if report.when == "call":
        _ACCEPTANCE_RESULTS[report.nodeid] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        # setup errors / skips never reach "call"
        _ACCEPTANCE_RESULTS[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LABELS:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, label in _ACCEPTANCE_LABELS.items():
        outcome = _ACCEPTANCE_RESULTS.get(nodeid, "not run")
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper())
        terminalreporter.write_line(f"[{word}] {label}")


@pytest.fixture
def tmp_store_path(tmp_path):
    return tmp_path / "sessions.sqlite3"
