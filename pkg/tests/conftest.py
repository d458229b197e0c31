import numpy as np
import pytest

from fhp import kernels
from fhp.collision import build_table

KERNEL_NAMES = ("motion_pull", "motion_lanes", "motion_tiles", "collide", "collide_tiles")


@pytest.fixture(scope="session")
def table():
    return build_table()


@pytest.fixture(params=sorted(kernels.available()))
def impl(request, monkeypatch):
    """Run the test once per available kernel implementation."""
    module = kernels.available()[request.param]
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(module, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20120712)


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
