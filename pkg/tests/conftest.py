import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def ball_points(n, rmax=0.95):
    """Strategy for points of the ball of C^n with |z| <= rmax."""
    coords = st.lists(st.floats(-1, 1), min_size=2 * n, max_size=2 * n)
    radius = st.floats(0, rmax)

    def build(args):
        c, r = args
        v = np.array(c[0::2]) + 1j * np.array(c[1::2])
        nv = np.linalg.norm(v)
        if nv < 1e-6:
            return np.zeros(n, dtype=complex)
        return r * v / nv

    return st.tuples(coords, radius).map(build)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
