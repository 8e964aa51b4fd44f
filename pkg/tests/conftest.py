import numpy as np
import pytest

from backflow import spectral, wigner
from backflow.states import GaussianComponent, build_momentum_state, reference_quantum_bus

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def record():
    """record(n, ok, detail) stores the verdict line for criterion n."""
    def _record(n, ok, detail):
        ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return _record


@pytest.fixture(scope="session")
def bus():
    return reference_quantum_bus()


@pytest.fixture(scope="session")
def gaussian():
    # far from k = 0 so truncation is invisible
    return build_momentum_state([GaussianComponent(1.0, 20.0, 1.5)], label="single-gaussian")


@pytest.fixture(scope="session")
def bus_wigner(bus):
    return wigner.wigner_transform(bus, wigner.auto_wigner_spec(bus))


@pytest.fixture(scope="session")
def coarse_solution():
    return spectral.solve_backflow(400, 20.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
