import numpy as np
import pytest

from voigtbq import spectral
from voigtbq.dynamics import State

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def random_real_field(grid, rng, kmax=None, mean_free=False):
    """Dealiased coefficients of a random real field (band-limited to kmax)."""
    x = rng.standard_normal(grid.shape)
    c = spectral.dealias(grid, spectral.forward_transform(grid, x))
    if kmax is not None:
        c = np.where(grid.kmag <= kmax, c, 0.0)
    if mean_free:
        c[0, 0] = 0.0
    return c


def random_state(grid, seed, kmax=None):
    rng = np.random.default_rng(seed)
    return State(
        random_real_field(grid, rng, kmax, mean_free=True),
        random_real_field(grid, rng, kmax),
        0.0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")
