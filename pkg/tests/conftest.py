import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def central_fd(fun, x, h=1e-5):
    """Central differences of a vector function; column j is d fun / d x_j."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def rank_by_elimination(M, tol):
    """Rank by Gaussian elimination with partial pivoting; pivots below tol count as zero."""
    A = np.array(M, dtype=float)
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[p, c]) <= tol:
            continue
        A[[r, p]] = A[[p, r]]
        A[r + 1:] -= np.outer(A[r + 1:, c] / A[r, c], A[r])
        r += 1
    return r


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """record(criterion, ok, detail): one status line for the acceptance summary; ok=None means excluded."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def _record(criterion: int, ok: bool | None, detail: str) -> None:
        status = "EXCLUDED" if ok is None else "PASS" if ok else "FAIL"
        line = f"criterion {criterion}: {status}  {detail}"
        lines.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
