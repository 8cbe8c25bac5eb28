from __future__ import annotations

import os

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def fixtures_dir() -> str:
    return FIXTURES


@pytest.fixture(scope="session")
def degenerate_lm_corpus_path() -> str:
    return os.path.join(FIXTURES, "lm_degenerate_corpus.txt")


@pytest.fixture(scope="session")
def e2e_config_path() -> str:
    return os.path.join(FIXTURES, "e2e", "config.yaml")


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else ("FAIL" if report.failed else "SKIP")
        print(f"\n[{status}] {name}", flush=True)
