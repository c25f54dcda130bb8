import numpy as np
import pytest
from hypothesis import settings, strategies as st

from qfridge.hamiltonian import SystemParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

energies = st.floats(0.2, 4.0, allow_nan=False)
couplings = st.floats(1e-3, 0.8, allow_nan=False)


@st.composite
def system_params(draw, resonant=False):
    e1 = draw(energies)
    if resonant:
        e3 = draw(st.floats(0.1, 3.0))
        return SystemParams(e1, e1 + e3, e3, draw(couplings))
    return SystemParams(e1, draw(energies), draw(energies), draw(couplings))


def random_density_matrix(rng, dim=8, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


@st.composite
def density_matrices(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rank = draw(st.integers(1, 8))
    return random_density_matrix(np.random.default_rng(seed), rank=rank)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
