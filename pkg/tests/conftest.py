from __future__ import annotations

import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from betaeta.driver import CorpusSpec, corpus, differential_run
from betaeta.kernel import parse_judgment

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
JUDGMENTS = ROOT / "judgments"

# Filled in by tests/test_acceptance.py, reported once at the end of the session.
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def load_judgment(name: str):
    return parse_judgment((JUDGMENTS / name).read_text())


@pytest.fixture(scope="session")
def default_cases():
    return corpus(CorpusSpec())


@pytest.fixture(scope="session")
def default_report(default_cases):
    workers = max(1, min(8, os.cpu_count() or 1))
    return differential_run(CorpusSpec(), workers=workers, cases=default_cases)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'}  {detail}")
