import sys

import pytest
from hypothesis import settings

from fluxonium import REFERENCE_DEVICE, benchmarking, coupled

settings.register_profile("ci", max_examples=25, deadline=None)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def device():
    return REFERENCE_DEVICE


@pytest.fixture(scope="session")
def g_star(device):
    return coupled.calibrate_coupling(device, 60.0)


@pytest.fixture(scope="session")
def coupled_device(device, g_star):
    return device.with_coupling(g_star)


@pytest.fixture(scope="session")
def dressed(coupled_device):
    return coupled.build_dressed(coupled_device, 0.5)


@pytest.fixture(scope="session")
def clifford_table():
    return benchmarking.build_clifford_table()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
