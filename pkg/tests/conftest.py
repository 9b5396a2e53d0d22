import numpy as np
import pytest
from hypothesis import settings

from crystal_riemann.isometry import SurfaceParams

SURFACES = [(5, 1, 2), (6, 1, 2), (8, 1, 3), (10, 1, 3), (12, 1, 5), (12, 2, 3), (12, 3, 4)]

settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def interior_points(params: SurfaceParams, k: int, rng, margin: float = 1e-3) -> np.ndarray:
    """Uniform random points of the triangle P kept away from its edges."""
    a = params.alpha
    v = np.array([0, np.cos(a), np.exp(1j * a)])
    w = rng.dirichlet([1, 1, 1], k)
    w = (1 - 3 * margin) * w + margin
    return w @ v


# ---------------------------------------------------------------------------
# acceptance report: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA: list[tuple[str, bool, str]] = []
_START = [0.0]


def pytest_sessionstart(session):
    import time

    _START[0] = time.perf_counter()


@pytest.fixture
def criterion():
    def record(label: str, ok: bool, detail: str) -> bool:
        _CRITERIA.append((label, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    import time

    if not _CRITERIA:
        return
    elapsed = time.perf_counter() - _START[0]
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
    terminalreporter.write_line(f"info  session wall time {elapsed:.1f} s (budget for the default suite: 120 s)")
