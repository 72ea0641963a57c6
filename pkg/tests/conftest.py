import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from tfrw.profiles import Lorentzian

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIOS = os.path.join(ROOT, "scenarios")

# unit-amplitude, unit-linewidth lines at 10 (emitted) and 5 (detected)
LINES_10_5 = dict(gamma0=1.0, gamma1=1.0, Gamma0=1.0, Gamma1=1.0, omega0=10.0, omega1=5.0)


@pytest.fixture
def emit_line():
    return Lorentzian(1.0, 1.0, 10.0)


@pytest.fixture
def detect_line():
    return Lorentzian(1.0, 1.0, 5.0)


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    if request.param == "numpy":
        monkeypatch.setenv("TFRW_DISABLE_NUMBA", "1")
    else:
        monkeypatch.delenv("TFRW_DISABLE_NUMBA", raising=False)
    return request.param


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    RESULTS = getattr(module, "RESULTS", None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
