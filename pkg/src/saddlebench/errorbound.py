"""Error-bound diagnostics of a non-degenerate game.

Eliminating one redundant coordinate per player (the smallest support index)
rewrites the supported subgame as

    <x_B, A_{B,N} y_N> = <x~, Q y~> - <x~, c> - <y~, b> + d

with x~, y~ the remaining support coordinates. The conditioning quantities
below (alpha, beta, gamma), the smallest singular value of the column-shifted
matrix ``Q - c 1^T`` and the modulus lower bound are all computed from this
reduced system. Minima over empty index sets evaluate to 1.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, fields

import numpy as np

from .exceptions import InvalidInputError, InvariantViolation, SolverFailureError
from .game import Game, spectral_norm
from .oracle import Equilibrium, solve_and_certify

EMPTY_MIN = 1.0
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class QSystem:
    Q: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float
    elim_i: int
    elim_j: int
    B: tuple[int, ...]
    N: tuple[int, ...]
    B_tilde: tuple[int, ...]
    N_tilde: tuple[int, ...]
    x_tilde: np.ndarray
    y_tilde: np.ndarray

    @property
    def empty(self) -> bool:
        """True when a support is a singleton, so there is nothing left to reduce."""
        return len(self.B_tilde) == 0 or len(self.N_tilde) == 0

    def residuals(self) -> tuple[float, float, float]:
        """(||Q y~ - c||_inf, ||Q^T x~ - b||_inf, |d - <x~, Q y~> - v|) without v."""
        if self.empty:
            return 0.0, 0.0, 0.0
        rc = float(np.max(np.abs(self.Q @ self.y_tilde - self.c)))
        rb = float(np.max(np.abs(self.Q.T @ self.x_tilde - self.b)))
        return rc, rb, float(self.d - self.x_tilde @ self.Q @ self.y_tilde)

    def params(self) -> np.ndarray:
        """Parameter vector ``(Q flat, b, c, d)`` in the column order of ``build_T``."""
        return np.concatenate([self.Q.reshape(-1), self.b, self.c, [self.d]])


def q_transform(g: Game, eq: Equilibrium, verify: bool = True, tol: float = RESIDUAL_TOL) -> QSystem:
    A = g.A
    B, N = eq.support_x, eq.support_y
    if len(B) == 0 or len(N) == 0:
        raise InvalidInputError("equilibrium has an empty support")
    i, j = B[0], N[0]
    Bt, Nt = B[1:], N[1:]
    d = float(A[i, j])
    b = -A[i, list(Nt)] + A[i, j]
    c = -A[list(Bt), j] + A[i, j]
    Q = A[np.ix_(Bt, Nt)] - A[i, list(Nt)][None, :] - A[list(Bt), j][:, None] + A[i, j]
    qs = QSystem(
        Q=Q.reshape(len(Bt), len(Nt)),
        b=np.asarray(b, dtype=np.float64),
        c=np.asarray(c, dtype=np.float64),
        d=d,
        elim_i=i,
        elim_j=j,
        B=B,
        N=N,
        B_tilde=Bt,
        N_tilde=Nt,
        x_tilde=np.asarray(eq.x_star[list(Bt)], dtype=np.float64),
        y_tilde=np.asarray(eq.y_star[list(Nt)], dtype=np.float64),
    )
    if verify and not qs.empty:
        rc, rb, dv = qs.residuals()
        if rc > tol or rb > tol or abs(dv - eq.value) > tol:
            raise InvariantViolation(
                f"reduced system residuals too large: |Qy-c|={rc:.3g}, |Q'x-b|={rb:.3g}, "
                f"|value gap|={abs(dv - eq.value):.3g}"
            )
    return qs


def build_T(B, N, i: int, j: int) -> np.ndarray:
    """Matrix mapping ``(Q flat, b, c, d)`` to ``A_{B,N}`` flattened row-major.

    Rows follow ``B x N`` row-major; columns are Q over ``B~ x N~`` row-major,
    then b over ``N~``, c over ``B~`` and finally d.
    """
    B, N = tuple(B), tuple(N)
    if i not in B or j not in N:
        raise InvalidInputError("eliminated indices must belong to the supports")
    Bt = [p for p in B if p != i]
    Nt = [q for q in N if q != j]
    nb, nn = len(Bt), len(Nt)
    size = len(B) * len(N)
    T = np.zeros((size, size))
    col_b = nb * nn
    col_c = col_b + nn
    col_d = col_c + nb
    row = 0
    for p in B:
        for q in N:
            T[row, col_d] = 1.0
            if p != i:
                T[row, col_c + Bt.index(p)] = -1.0
            if q != j:
                T[row, col_b + Nt.index(q)] = -1.0
            if p != i and q != j:
                T[row, Bt.index(p) * nn + Nt.index(q)] = 1.0
            row += 1
    return T


def block_from_params(qs: QSystem, params) -> np.ndarray:
    """Apply ``T`` to a parameter vector and return the ``|B| x |N|`` block."""
    T = build_T(qs.B, qs.N, qs.elim_i, qs.elim_j)
    return (T @ np.asarray(params, dtype=np.float64)).reshape(len(qs.B), len(qs.N))


def compute_alpha_beta(g: Game, eq: Equilibrium) -> tuple[float, float, float, float]:
    A = g.A
    x, y, v = eq.x_star, eq.y_star, eq.value
    B, N = list(eq.support_x), list(eq.support_y)
    Bbar, Nbar = list(eq.complement_x(g.n)), list(eq.complement_y(g.m))
    alpha_P = float(np.min(x[B])) if B else EMPTY_MIN
    alpha_D = float(np.min(y[N])) if N else EMPTY_MIN
    beta_P = float(np.min(v - x[B] @ A[np.ix_(B, Nbar)])) if Nbar else EMPTY_MIN
    beta_D = float(np.min(A[np.ix_(Bbar, N)] @ y[N] - v)) if Bbar else EMPTY_MIN
    return alpha_P, alpha_D, beta_P, beta_D


def column_distances(M) -> np.ndarray:
    """Distance of each column to the span of the other columns (least squares)."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    k = M.shape[1]
    out = np.empty(k)
    for j in range(k):
        col = M[:, j]
        rest = np.delete(M, j, axis=1)
        if rest.shape[1] == 0:
            out[j] = np.linalg.norm(col)
            continue
        coef, *_ = np.linalg.lstsq(rest, col, rcond=None)
        out[j] = np.linalg.norm(col - rest @ coef)
    return out


def row_distances(M) -> np.ndarray:
    return column_distances(np.atleast_2d(np.asarray(M, dtype=np.float64)).T)


def compute_gamma(qs: QSystem) -> tuple[float, float]:
    if qs.empty:
        return EMPTY_MIN, EMPTY_MIN
    return float(column_distances(qs.Q).min()), float(row_distances(qs.Q).min())


def bar_Q(qs: QSystem, eq: Equilibrium | None = None) -> np.ndarray:
    """Column-shifted matrix with columns ``Q[:, j] - c``."""
    return qs.Q - qs.c[:, None]


def sigma_min(M) -> float:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if M.size == 0:
        return EMPTY_MIN
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def column_coefficients(M, x) -> np.ndarray:
    """``p`` with ``M p = x`` for square full-rank ``M``, via the SVD pseudo-inverse."""
    M = np.asarray(M, dtype=np.float64)
    U, s, Vt = np.linalg.svd(M)
    if s[-1] <= 0.0:
        raise InvalidInputError("matrix is singular")
    return Vt.T @ ((U.T @ np.asarray(x, dtype=np.float64)) / s)


def neg_second_moment(M) -> tuple[float, float, float]:
    """``sum sigma_r^-2``, ``sum row_dist^-2``, ``sum col_dist^-2`` of a square invertible matrix."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError("negative second moment needs a square matrix")
    s = np.linalg.svd(M, compute_uv=False)
    return (
        float(np.sum(s**-2.0)),
        float(np.sum(row_distances(M) ** -2.0)),
        float(np.sum(column_distances(M) ** -2.0)),
    )


def lb_sigma_bound(Qbar) -> float:
    """``min_j dist(col_j, span(others)) / sqrt(#columns)``; never exceeds sigma_min."""
    Qbar = np.atleast_2d(Qbar)
    return float(column_distances(Qbar).min() / math.sqrt(Qbar.shape[1]))


def barq_factor(qs: QSystem) -> float:
    """``1 + |N~| / (1 - sum_{j in N~} y*_j)``, the Q to Q-bar distance ratio bound."""
    return 1.0 + len(qs.N_tilde) / (1.0 - float(np.sum(qs.y_tilde)))


def a_flat_inf(g: Game) -> float:
    return float(np.max(np.abs(g.A)))


def kappa_core(g: Game, eq: Equilibrium, qs: QSystem | None = None) -> float:
    """Modulus lower bound with the absolute constant dropped (a shape quantity)."""
    qs = q_transform(g, eq) if qs is None else qs
    aP, aD, bP, bD = compute_alpha_beta(g, eq)
    gP, gD = compute_gamma(qs)
    core = min(aD**2 * bD * gP, aP**2 * bP * gD)
    if core <= 0.0:
        warnings.warn("kappa_core is zero: equilibrium looks degenerate", RuntimeWarning, stacklevel=2)
        return 0.0
    return core / (a_flat_inf(g) * min(g.n, g.m) ** 3)


def kappa_samples(g: Game, eq: Equilibrium, n_samples: int, seed: int):
    """Sample points used by ``kappa_empirical``.

    Returns ``(Z, phi, dist)`` with one joint strategy per row of ``Z``.
    """
    n, m = g.shape
    rng = np.random.default_rng(seed)
    zs = eq.z_vec
    pts = []
    for i in range(n):
        for j in range(m):
            z = np.zeros(n + m)
            z[i] = 1.0
            z[n + j] = 1.0
            pts.append(z)
    if n_samples > 0:
        X = rng.dirichlet(np.ones(n), size=n_samples)
        Y = rng.dirichlet(np.ones(m), size=n_samples)
        pts.extend(np.hstack([X, Y]))
        radii = (1e-1, 1e-2, 1e-3)
        I = rng.integers(0, n, size=n_samples)
        J = rng.integers(0, m, size=n_samples)
        for k in range(n_samples):
            vert = np.zeros(n + m)
            vert[I[k]] = 1.0
            vert[n + J[k]] = 1.0
            direction = vert - zs
            length = np.linalg.norm(direction)
            if length == 0.0:
                continue
            r = min(radii[k % 3], length)
            pts.append(zs + (r / length) * direction)
    Z = np.array(pts)
    phi = np.max(Z[:, :n] @ g.A, axis=1) - np.min(Z[:, n:] @ g.A.T, axis=1)
    dist = np.linalg.norm(Z - zs, axis=1)
    keep = dist > 1e-14
    return Z[keep], phi[keep], dist[keep]


def kappa_empirical(g: Game, eq: Equilibrium, n_samples: int = 200, seed: int = 0) -> float:
    """Smallest sampled ratio ``Phi(z) / ||z - z*||``, an upper estimate of the modulus."""
    _, phi, dist = kappa_samples(g, eq, n_samples, seed)
    if phi.size == 0:
        return math.inf
    return float(np.min(phi / dist))


@dataclass(frozen=True)
class Diagnostics:
    alpha_P: float
    alpha_D: float
    beta_P: float
    beta_D: float
    gamma_P: float
    gamma_D: float
    sigma_min_Qbar: float
    kappa_core: float
    kappa_empirical: float
    a_flat_inf: float


def diagnose(g: Game, eq: Equilibrium, n_samples: int = 200, seed: int = 0,
             qs: QSystem | None = None) -> Diagnostics:
    qs = q_transform(g, eq) if qs is None else qs
    aP, aD, bP, bD = compute_alpha_beta(g, eq)
    gP, gD = compute_gamma(qs)
    smin = EMPTY_MIN if qs.empty else sigma_min(bar_Q(qs, eq))
    return Diagnostics(
        alpha_P=aP,
        alpha_D=aD,
        beta_P=bP,
        beta_D=bD,
        gamma_P=gP,
        gamma_D=gD,
        sigma_min_Qbar=smin,
        kappa_core=kappa_core(g, eq, qs),
        kappa_empirical=kappa_empirical(g, eq, n_samples, seed),
        a_flat_inf=a_flat_inf(g),
    )


# --- support stability ------------------------------------------------------

@dataclass(frozen=True)
class StabilityBounds:
    """Upper bounds on the support-stability radius; ``inf`` marks an inapplicable construction."""

    delta_ub_beta: float
    delta_ub_sigma: float
    delta_ub_alpha: float
    delta_empirical: float


def _embed(g: Game, rows, cols, block) -> np.ndarray:
    out = np.zeros(g.shape)
    out[np.ix_(list(rows), list(cols))] = block
    return out


def sigma_perturbation(g: Game, qs: QSystem) -> np.ndarray | None:
    """Payoff change that makes Q singular while keeping b, c, d fixed."""
    if qs.empty:
        return None
    U, s, Vt = np.linalg.svd(qs.Q)
    dQ = -s[-1] * np.outer(U[:, -1], Vt[-1])
    k_b, k_c = len(qs.b), len(qs.c)
    params = np.concatenate([dQ.reshape(-1), np.zeros(k_b + k_c + 1)])
    return _embed(g, qs.B, qs.N, block_from_params(qs, params))


def alpha_perturbation(g: Game, eq: Equilibrium, qs: QSystem) -> np.ndarray | None:
    """Payoff change moving b so the reduced system forces a zero support weight.

    The b shift is placed on the eliminated row only: ``dA[i, j'] = -db[j']``.
    """
    if qs.empty:
        return None
    B = list(qs.B)
    xB = eq.x_star[B]
    pos = int(np.argmin(xB))
    alpha_P = float(xB[pos])
    x_new = qs.x_tilde.copy()
    if B[pos] != qs.elim_i:
        x_new[qs.B_tilde.index(B[pos])] = 0.0
    else:
        x_new += alpha_P / len(qs.B_tilde)
    db = qs.Q.T @ (x_new - qs.x_tilde)
    dA = np.zeros(g.shape)
    dA[qs.elim_i, list(qs.N_tilde)] = -db
    return dA


def support_preserved(A: np.ndarray, B, N) -> bool:
    try:
        eq, cert = solve_and_certify(Game(A))
    except SolverFailureError:
        return False
    return cert.is_nondegenerate and eq.support_x == tuple(B) and eq.support_y == tuple(N)


def empirical_stability(g: Game, eq: Equilibrium, n_directions: int = 20, seed: int = 0,
                        tol: float = 1e-6) -> float:
    """Smallest support-changing step along random unit-spectral-norm directions.

    Each direction is bisected on ``(0, 2 ||A||]``; a direction that never
    changes the support within that range contributes the range end.
    """
    rng = np.random.default_rng(seed)
    B, N = eq.support_x, eq.support_y
    t_max = 2.0 * spectral_norm(g.A)
    if t_max == 0.0:
        return 0.0
    best = t_max
    for _ in range(n_directions):
        E = rng.standard_normal(g.shape)
        E /= spectral_norm(E)
        if support_preserved(g.A + t_max * E, B, N):
            continue
        lo, hi = 0.0, t_max
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if support_preserved(g.A + mid * E, B, N):
                lo = mid
            else:
                hi = mid
        best = min(best, hi)
    return best


def stability_bounds(g: Game, eq: Equilibrium, qs: QSystem | None = None,
                     n_directions: int = 20, seed: int = 0) -> StabilityBounds:
    qs = q_transform(g, eq) if qs is None else qs
    _, _, bP, bD = compute_alpha_beta(g, eq)
    beta_candidates = []
    if eq.complement_y(g.m):
        beta_candidates.append(bP)
    if eq.complement_x(g.n):
        beta_candidates.append(bD)
    ub_beta = min(beta_candidates) if beta_candidates else math.inf
    dA = sigma_perturbation(g, qs)
    ub_sigma = math.inf if dA is None else spectral_norm(dA)
    dA = alpha_perturbation(g, eq, qs)
    ub_alpha = math.inf if dA is None else spectral_norm(dA)
    return StabilityBounds(
        delta_ub_beta=ub_beta,
        delta_ub_sigma=ub_sigma,
        delta_ub_alpha=ub_alpha,
        delta_empirical=empirical_stability(g, eq, n_directions, seed),
    )


# --- report serialization ---------------------------------------------------

REPORT_FIELDS = tuple(f.name for f in fields(Diagnostics)) + tuple(f.name for f in fields(StabilityBounds))


def report_dict(diag: Diagnostics | None = None, stab: StabilityBounds | None = None) -> dict:
    out = {}
    for part in (diag, stab):
        if part is not None:
            out.update(asdict(part))
    # inapplicable constructions are reported as absent
    return {k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in out.items()}


def report_to_text(report: dict) -> str:
    lines = [f"{k}={v!r}" for k, v in report.items() if v is not None]
    return "\n".join(lines) + "\n"


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def report_from_json(text: str) -> dict:
    return json.loads(text)
