"""Exact equilibria of small games by support enumeration.

For every candidate pair of supports (B, N) with |B| = |N| = k, in order of
increasing k and then lexicographically, the two square indifference systems

    A_{B,N}^T x_B = v 1,  1^T x_B = 1        A_{B,N} y_N = v 1,  1^T y_N = 1

are solved and the candidate is accepted if both solutions are nonnegative and
the resulting joint strategy has duality gap at most ``tol``. The first
accepted candidate is returned, which makes the result deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np

from .exceptions import InvalidInputError, SolverFailureError, UnsupportedSizeError
from .game import Game, JointStrategy

MAX_DIM = 20
SUPPORT_TOL = 1e-9
# above this many candidate pairs the LP-guided path is used instead
ENUM_BUDGET = 200_000
_CHUNK = 2048


@dataclass(frozen=True)
class Equilibrium:
    x_star: np.ndarray
    y_star: np.ndarray
    value: float
    support_x: tuple[int, ...]
    support_y: tuple[int, ...]

    @property
    def z(self) -> JointStrategy:
        return JointStrategy(self.x_star, self.y_star)

    @property
    def z_vec(self) -> np.ndarray:
        return np.concatenate([self.x_star, self.y_star])

    def complement_x(self, n: int) -> tuple[int, ...]:
        return tuple(i for i in range(n) if i not in self.support_x)

    def complement_y(self, m: int) -> tuple[int, ...]:
        return tuple(j for j in range(m) if j not in self.support_y)


@dataclass(frozen=True)
class NonDegeneracyCertificate:
    is_nondegenerate: bool
    tight_count_x: int
    tight_count_y: int
    unique: bool
    complementarity_ok: bool


def _bordered(M: np.ndarray) -> np.ndarray:
    """Stack ``[[M, -1], [1^T, 0]]`` for a batch of square matrices ``M``."""
    P, k, _ = M.shape
    out = np.zeros((P, k + 1, k + 1))
    out[:, :k, :k] = M
    out[:, :k, k] = -1.0
    out[:, k, :k] = 1.0
    return out


def _batch_solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(M, np.broadcast_to(rhs, M.shape[:2])[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(M.shape[:2], np.nan)
        for p in range(M.shape[0]):
            try:
                out[p] = np.linalg.solve(M[p], rhs)
            except np.linalg.LinAlgError:
                pass
        return out


def _finish(A: np.ndarray, x: np.ndarray, y: np.ndarray, tol: float):
    """Clip round-off negatives, renormalize, and check the duality gap."""
    if np.any(x < -tol) or np.any(y < -tol):
        return None
    x = np.clip(x, 0.0, None)
    y = np.clip(y, 0.0, None)
    x /= x.sum()
    y /= y.sum()
    gap = float(np.max(A.T @ x) - np.min(A @ y))
    if not gap <= tol:
        return None
    return x, y


def _make_equilibrium(A, x, y) -> Equilibrium:
    v = float(x @ A @ y)
    B = tuple(int(i) for i in np.nonzero(x > SUPPORT_TOL)[0])
    N = tuple(int(j) for j in np.nonzero(y > SUPPORT_TOL)[0])
    x.setflags(write=False)
    y.setflags(write=False)
    return Equilibrium(x, y, v, B, N)


def _candidate_pairs(n: int, m: int, k: int):
    for B in combinations(range(n), k):
        for N in combinations(range(m), k):
            yield B, N


def _enumerate(A: np.ndarray, tol: float):
    n, m = A.shape
    rhs_cache = {}
    for k in range(1, min(n, m) + 1):
        rhs = rhs_cache.setdefault(k, np.eye(k + 1)[k])
        pairs = _candidate_pairs(n, m, k)
        while True:
            chunk = list(islice(pairs, _CHUNK))
            if not chunk:
                break
            Bs = np.array([c[0] for c in chunk])
            Ns = np.array([c[1] for c in chunk])
            sub = A[Bs[:, :, None], Ns[:, None, :]]
            xs = _batch_solve(_bordered(np.swapaxes(sub, 1, 2)), rhs)
            ys = _batch_solve(_bordered(sub), rhs)
            ok = np.all(xs[:, :k] >= -tol, axis=1) & np.all(ys[:, :k] >= -tol, axis=1)
            for p in np.nonzero(ok)[0]:
                x = np.zeros(n)
                y = np.zeros(m)
                x[Bs[p]] = xs[p, :k]
                y[Ns[p]] = ys[p, :k]
                res = _finish(A, x, y, tol)
                if res is not None:
                    return res
    return None


def _lp_guided(A: np.ndarray, tol: float):
    """Find supports with an LP, then re-solve the square system on them."""
    from scipy.optimize import linprog

    n, m = A.shape
    # Player x: min v  s.t. A^T x <= v 1, 1^T x = 1, x >= 0
    cx = np.r_[np.zeros(n), 1.0]
    rx = linprog(
        cx,
        A_ub=np.c_[A.T, -np.ones(m)],
        b_ub=np.zeros(m),
        A_eq=np.r_[np.ones(n), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * n + [(None, None)],
        method="highs-ds",
    )
    # Player y: max w  s.t. A y >= w 1, 1^T y = 1, y >= 0
    cy = np.r_[np.zeros(m), -1.0]
    ry = linprog(
        cy,
        A_ub=np.c_[-A, np.ones(n)],
        b_ub=np.zeros(n),
        A_eq=np.r_[np.ones(m), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * m + [(None, None)],
        method="highs-ds",
    )
    if not (rx.success and ry.success):
        return None
    x_lp = np.clip(rx.x[:n], 0, None)
    y_lp = np.clip(ry.x[:m], 0, None)
    B = np.nonzero(x_lp > 1e-7)[0]
    N = np.nonzero(y_lp > 1e-7)[0]
    if len(B) == len(N):
        k = len(B)
        sub = A[np.ix_(B, N)][None]
        rhs = np.eye(k + 1)[k]
        xs = _batch_solve(_bordered(np.swapaxes(sub, 1, 2)), rhs)[0]
        ys = _batch_solve(_bordered(sub), rhs)[0]
        x = np.zeros(n)
        y = np.zeros(m)
        x[B] = xs[:k]
        y[N] = ys[:k]
        res = _finish(A, x, y, tol)
        if res is not None:
            return res
    return _finish(A, x_lp / x_lp.sum(), y_lp / y_lp.sum(), tol)


def solve_exact(g: Game, tol: float = 1e-9) -> Equilibrium:
    """Equilibrium with duality gap at most ``tol``; unique for non-degenerate games."""
    if not 1e-12 <= tol <= 1e-6:
        raise InvalidInputError(f"tol must lie in [1e-12, 1e-6], got {tol}")
    n, m = g.shape
    if n > MAX_DIM or m > MAX_DIM:
        raise UnsupportedSizeError(f"exact oracle supports n, m <= {MAX_DIM}, got {g.shape}")
    A = g.A
    if math.comb(n + m, n) - 1 <= ENUM_BUDGET:
        res = _enumerate(A, tol)
    else:
        res = _lp_guided(A, tol)
    if res is None:
        raise SolverFailureError("no candidate support yielded an equilibrium within tolerance")
    return _make_equilibrium(A, *res)


def certify_nondegenerate(g: Game, eq: Equilibrium, tol: float = 1e-9) -> NonDegeneracyCertificate:
    """Count tight inequalities at the equilibrium and test the support system."""
    A = g.A
    n, m = g.shape
    x, y, v = eq.x_star, eq.y_star, eq.value
    tight_x = int(np.sum(x <= tol) + np.sum(np.abs(A.T @ x - v) <= tol))
    tight_y = int(np.sum(y <= tol) + np.sum(np.abs(A @ y - v) <= tol))
    B, N = eq.support_x, eq.support_y
    comp = len(B) == len(N)
    unique = False
    if comp and len(B) > 0:
        M = _bordered(A[np.ix_(B, N)][None])[0]
        s = np.linalg.svd(M, compute_uv=False)
        unique = bool(s[-1] > 1e-10 * max(1.0, s[0]))
    nondeg = unique and comp and tight_x == n and tight_y == m
    return NonDegeneracyCertificate(nondeg, tight_x, tight_y, unique, comp)


def solve_and_certify(g: Game, tol: float = 1e-9):
    eq = solve_exact(g, tol)
    return eq, certify_nondegenerate(g, eq, max(tol, SUPPORT_TOL))
