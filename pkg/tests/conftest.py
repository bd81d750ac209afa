"""Shared fixtures plus a per-criterion summary for the acceptance suite."""

from pathlib import Path

import numpy as np
import pytest

from traitlex import mlcore

DATA_DIR = Path(__file__).parent / "data"

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            report.outcome, report.outcome.upper()
        )
        if name not in _acceptance_results or outcome == "FAIL":
            _acceptance_results[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_results):
        terminalreporter.write_line(f"{_acceptance_results[name]}  {name}")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture
def separable_dataset():
    """8 well-separated classes on 20 features, 500 points.

    Class c has mean 4 on feature c and mean 0 elsewhere, with sigma=0.3
    noise, so every reasonable learner should fit it nearly perfectly.
    """
    gen = np.random.Generator(np.random.PCG64(42))
    n, d, c = 500, 20, 8
    y = gen.integers(0, c, n)
    X = gen.normal(0.0, 0.3, (n, d))
    for i in range(n):
        X[i, y[i]] += 4.0
    names = tuple(f"f{j}" for j in range(d))
    y_score = (np.asarray(y, dtype=float) + 0.5) / c
    return mlcore.Dataset(feature_names=names, X=X, y_class=y, y_score=y_score)
