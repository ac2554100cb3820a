"""First-order solvers with last-iterate instrumentation and rate certificates.

All solvers share one contract: the gap is checked before the first step
(a start point within ``eps`` returns immediately with ``iters_used == 0``),
iterates are recorded at ``t = 0``, every ``record_every`` steps, the stopping
step and the final step, and ``converged`` implies ``phi_final <= eps``.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .exceptions import InvalidInputError, StepSizeTooLargeError
from .game import Game, JointStrategy, Trajectory, project_joint, spectral_norm
from .oracle import Equilibrium

ALGORITHMS = ("ogda", "egda", "omwu", "itersmooth")
D_Z = 2.0


@dataclass(frozen=True)
class SolverConfig:
    algorithm: str = "ogda"
    eta: float | None = None  # None: algorithm default
    eps: float = 1e-6
    max_iters: int = 10**6
    rho: float = 2.0
    record_every: int = 1
    allow_large_eta: bool = False
    early_stop: bool = True

    def __post_init__(self):
        algo = str(self.algorithm).lower()
        if algo not in ALGORITHMS:
            raise InvalidInputError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        object.__setattr__(self, "algorithm", algo)
        if self.eta is not None and not (math.isfinite(self.eta) and self.eta > 0):
            raise InvalidInputError(f"eta must be a positive finite number, got {self.eta}")
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise InvalidInputError(f"eps must be positive, got {self.eps}")
        if int(self.max_iters) < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if not self.rho > 1:
            raise InvalidInputError(f"rho must exceed 1, got {self.rho}")
        if int(self.record_every) < 1:
            raise InvalidInputError("record_every must be >= 1")

    def resolved_eta(self, g: Game) -> float:
        if self.eta is not None:
            return float(self.eta)
        return default_eta(g, self.algorithm)


def default_eta(g: Game, algorithm: str) -> float:
    if algorithm == "omwu":
        scale = float(np.max(np.abs(g.A)))
        return 1.0 / (16.0 * scale) if scale > 0 else 1.0
    L = spectral_norm(g.A)
    return 1.0 / (8.0 * L) if L > 0 else 1.0


@dataclass(frozen=True)
class SolveResult:
    z_final: JointStrategy
    iters_used: int
    phi_final: float
    trajectory: Trajectory
    converged: bool
    algorithm: str = ""
    eta: float | None = None
    outer_iters: int | None = None  # IterSmooth only


def _start(g: Game, z0: JointStrategy | None) -> JointStrategy:
    if z0 is None:
        return JointStrategy.uniform(g.n, g.m)
    if z0.x.shape[0] != g.n or z0.y.shape[0] != g.m:
        raise InvalidInputError(f"start point dims do not match game {g.shape}")
    return z0


def _eq_arrays(g: Game, eq: Equilibrium | None):
    if eq is None:
        return None, None
    if eq.x_star.shape[0] != g.n or eq.y_star.shape[0] != g.m:
        raise InvalidInputError("equilibrium dims do not match game")
    return np.array(eq.x_star), np.array(eq.y_star)


def _final_strategy(x, y) -> JointStrategy:
    # kernels keep block sums within round-off of 1; snap the last ulps
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, None)
    y = np.clip(np.asarray(y, dtype=np.float64), 0.0, None)
    return JointStrategy(x / x.sum(), y / y.sum())


def _package(out, cfg: SolverConfig, eta, has_eq, outer=None) -> SolveResult:
    x, y, iters, phi, it, ph, dist, conv = out
    traj = Trajectory(it, ph, dist if has_eq else None)
    return SolveResult(_final_strategy(x, y), int(iters), float(phi), traj, bool(conv),
                       cfg.algorithm, eta, outer)


def _check(cfg: SolverConfig, algo: str):
    if cfg.algorithm != algo:
        raise InvalidInputError(f"config is for {cfg.algorithm!r}, not {algo!r}")


def run_ogda(g: Game, cfg: SolverConfig, z0: JointStrategy | None = None,
             eq: Equilibrium | None = None, backend=None) -> SolveResult:
    _check(cfg, "ogda")
    k = backend or kernels
    z0 = _start(g, z0)
    eta = cfg.resolved_eta(g)
    L = spectral_norm(g.A)
    if L > 0 and eta > 1.0 / (8.0 * L) * (1 + 1e-12):
        msg = f"eta={eta:g} exceeds 1/(8||A||)={1.0 / (8.0 * L):g}"
        if not cfg.allow_large_eta:
            raise InvalidInputError(msg + "; pass allow_large_eta to override")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    xs, ys = _eq_arrays(g, eq)
    out = k.run_ogda(g.A, z0.x, z0.y, eta, cfg.eps, int(cfg.max_iters), int(cfg.record_every),
                     cfg.early_stop, xs, ys)
    return _package(out, cfg, eta, eq is not None)


def run_egda(g: Game, cfg: SolverConfig, z0: JointStrategy | None = None,
             eq: Equilibrium | None = None, backend=None) -> SolveResult:
    _check(cfg, "egda")
    k = backend or kernels
    z0 = _start(g, z0)
    eta = cfg.resolved_eta(g)
    xs, ys = _eq_arrays(g, eq)
    out = k.run_egda(g.A, z0.x, z0.y, eta, cfg.eps, int(cfg.max_iters), int(cfg.record_every),
                     cfg.early_stop, xs, ys)
    return _package(out, cfg, eta, eq is not None)


def run_omwu(g: Game, cfg: SolverConfig, eq: Equilibrium | None = None, backend=None) -> SolveResult:
    """Optimistic multiplicative weights from the uniform point."""
    _check(cfg, "omwu")
    k = backend or kernels
    eta = cfg.resolved_eta(g)
    xs, ys = _eq_arrays(g, eq)
    try:
        out = k.run_omwu(g.A, eta, cfg.eps, int(cfg.max_iters), int(cfg.record_every),
                         cfg.early_stop, xs, ys)
    except OverflowError as exc:
        t = int(exc.args[0]) if exc.args and isinstance(exc.args[0], (int, np.integer)) else -1
        raise StepSizeTooLargeError(t) from exc
    return _package(out, cfg, eta, eq is not None)


def inner_cap(norm_A: float, eps: float) -> int:
    """Iteration cap of one smoothing call at target ``eps``."""
    return 4 * math.ceil(2.0 * norm_A * D_Z / eps) + 16


def run_itersmooth(g: Game, cfg: SolverConfig, z0: JointStrategy | None = None,
                   eq: Equilibrium | None = None, backend=None) -> SolveResult:
    """Iterated smoothing: shrink the target gap by ``rho`` each outer round.

    ``iters_used`` counts inner steps; one trajectory record is kept per outer
    round at the cumulative inner step count.
    """
    _check(cfg, "itersmooth")
    k = backend or kernels
    z0 = _start(g, z0)
    A = g.A
    L = spectral_norm(A)
    xs, ys = _eq_arrays(g, eq)
    x, y = np.array(z0.x), np.array(z0.y)

    its, phis, dists = [], [], []

    def record(t, phi):
        its.append(t)
        phis.append(phi)
        if xs is not None:
            dists.append(math.sqrt(float(np.sum((x - xs) ** 2) + np.sum((y - ys) ** 2))))

    phi = float(k.duality_gap(A, x, y))
    record(0, phi)
    total = 0
    outer = 0
    converged = phi <= cfg.eps
    target = phi
    while not converged and total < cfg.max_iters:
        target /= cfg.rho
        cap = min(inner_cap(L, target), int(cfg.max_iters) - total)
        x, y, used, ok = k.smoothing(A, x, y, target, L, cap)
        total += int(used)
        outer += 1
        phi = float(k.duality_gap(A, x, y))
        record(total, phi)
        converged = phi <= cfg.eps
        if not ok:
            break
    traj = Trajectory(np.array(its, dtype=np.int64), np.array(phis),
                      np.array(dists) if xs is not None else None)
    return SolveResult(_final_strategy(x, y), total, phi, traj, converged, "itersmooth", None, outer)


def solve(g: Game, cfg: SolverConfig, z0: JointStrategy | None = None,
          eq: Equilibrium | None = None, backend=None) -> SolveResult:
    if cfg.algorithm == "omwu":
        if z0 is not None:
            warnings.warn("OMWU always starts from the uniform point; z0 ignored", RuntimeWarning,
                          stacklevel=2)
        return run_omwu(g, cfg, eq, backend)
    runner = {"ogda": run_ogda, "egda": run_egda, "itersmooth": run_itersmooth}[cfg.algorithm]
    return runner(g, cfg, z0, eq, backend)


# --- rate certificates ------------------------------------------------------

def kappa_prime(kappa: float) -> float:
    """Subregularity parameter implied by an error bound with modulus ``kappa``."""
    return kappa / 2.0


def iteration_bound(kappa_prime: float, norm_A: float, eps: float) -> int:
    """OGDA iterations sufficient for ``dist(z, Z*) <= eps`` at ``eta = 1/(8||A||)``."""
    if not (kappa_prime > 0 and norm_A > 0 and eps > 0):
        raise InvalidInputError("kappa_prime, norm_A and eps must all be positive")
    num = math.log(8.0 * D_Z / eps)
    den = math.log1p(kappa_prime**2 / (324.0 * norm_A**2))
    return 2 * math.ceil(num / den)


def ogda_envelope(t, eta: float, kappa_prime: float, dist0: float):
    """``8 (1 + 16 eta^2 kappa'^2 / 81)^(-t/2) dist0``, the linear-rate distance envelope."""
    t = np.asarray(t, dtype=np.float64)
    return 8.0 * (1.0 + 16.0 * eta**2 * kappa_prime**2 / 81.0) ** (-t / 2.0) * dist0


def egda_gap_bound(g: Game, z: JointStrategy, eta: float) -> float:
    """``(2/eta) ||z - Proj(z - eta F(z))||``, an upper bound on the duality gap."""
    zv = z.z
    F = np.concatenate([g.A @ z.y, -(g.A.T @ z.x)])
    return 2.0 / eta * float(np.linalg.norm(zv - project_joint(zv - eta * F, g.n)))


def log_gap_slope(traj: Trajectory, floor: float = 1e-300) -> float:
    """Least-squares slope of ``ln phi`` against iteration over the final half of ``traj``."""
    it = np.asarray(traj.iters, dtype=np.float64)
    phi = np.maximum(np.asarray(traj.phi, dtype=np.float64), floor)
    half = it.size // 2
    it, phi = it[half:], phi[half:]
    if it.size < 2:
        return float("nan")
    return float(np.polyfit(it, np.log(phi), 1)[0])


# --- output -----------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(result: SolveResult, path) -> None:
    traj = result.trajectory
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "phi", "dist_to_eq"])
        for k in range(len(traj)):
            d = "" if traj.dist is None else _fmt(traj.dist[k])
            w.writerow([int(traj.iters[k]), _fmt(traj.phi[k]), d])


def with_algorithm(cfg: SolverConfig, algorithm: str) -> SolverConfig:
    return replace(cfg, algorithm=algorithm)
