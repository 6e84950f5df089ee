import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cellenergy.config import reference_scenario

settings.register_profile("ci", suppress_health_check=(HealthCheck.too_slow,), deadline=None)
settings.load_profile("ci")

_ACCEPTANCE = []


@pytest.fixture
def reference():
    return reference_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_line():
    def emit(criterion: int, ok: bool, detail: str):
        _ACCEPTANCE.append(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
