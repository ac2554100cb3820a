from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linprog

from saddlebench.game import make_illcond_game
from saddlebench.oracle import solve_and_certify


@pytest.fixture(scope="session")
def illcond():
    g = make_illcond_game(0.25)
    eq, cert = solve_and_certify(g)
    return g, eq, cert


def lp_value_and_x(A):
    """Independent equilibrium oracle: min_x max_j (A^T x)_j by linear programming."""
    n, m = A.shape
    res = linprog(
        np.r_[np.zeros(n), 1.0],
        A_ub=np.c_[A.T, -np.ones(m)],
        b_ub=np.zeros(m),
        A_eq=np.r_[np.ones(n), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * n + [(None, None)],
        method="highs",
    )
    assert res.success
    return res.x[n], res.x[:n]


def bisect_projection(v, iters=200):
    """Simplex projection by bisection on the threshold (no sorting)."""
    v = np.asarray(v, dtype=float)
    lo, hi = v.min() - 1.0, v.max()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(v - mid, 0).sum() > 1.0:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0)


def brute_gap(A, x, y):
    """Duality gap by enumerating every pure strategy explicitly."""
    n, m = A.shape
    best_y = max(float(x @ A @ np.eye(m)[j]) for j in range(m))
    best_x = min(float(np.eye(n)[i] @ A @ y) for i in range(n))
    return best_y - best_x


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
