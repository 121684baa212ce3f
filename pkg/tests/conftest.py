import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

from kconv.euler import ConservedField, GasModel, Grid2D, primitive_to_conserved  # noqa: E402


@pytest.fixture
def gas():
    return GasModel(1.4)


def random_state(n, rng, gas, boundary="periodic", spread=0.5):
    """Smooth-ish admissible random field on an ``n x n`` grid."""
    prim = np.stack([
        1.0 + spread * rng.random((n, n)),
        spread * (rng.random((n, n)) - 0.5),
        spread * (rng.random((n, n)) - 0.5),
        1.0 + spread * rng.random((n, n)),
    ])
    return ConservedField(Grid2D(n, boundary), primitive_to_conserved(prim, gas))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
