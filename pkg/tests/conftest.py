import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from dtpasp.lang import parse

DATA = Path(__file__).resolve().parent.parent / "data"

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def load(name: str):
    return parse((DATA / name).read_text())


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def example():
    """``example("ex5")`` -> parsed program from data/ex5.lp."""
    return lambda name: load(f"{name}.lp")


def pytest_terminal_summary(terminalreporter):
    # one PASS/FAIL line per acceptance criterion that ran
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
