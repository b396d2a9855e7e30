import numpy as np
import pytest

from fixevent import kernels

BACKENDS = kernels.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    """Each available kernel module (compiled core and numpy fallback)."""
    return BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
