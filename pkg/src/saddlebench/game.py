"""Payoff matrices, simplex strategies, the saddle operator and the duality gap.

Player x minimizes ``x^T A y`` over the simplex, Player y maximizes it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .exceptions import InvalidInputError

SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Provenance:
    """How a perturbed game was drawn: ``A = A_bar + N(0, sigma^2)`` noise."""

    A_bar: np.ndarray
    sigma: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "A_bar", _frozen(self.A_bar))
        if not 0.0 <= self.sigma or self.sigma**2 > 1.0:
            raise InvalidInputError(f"sigma must satisfy 0 <= sigma^2 <= 1, got {self.sigma}")
        if np.any(np.abs(self.A_bar) > 1.0):
            raise InvalidInputError("base matrix entries must lie in [-1, 1]")
        if self.seed < 0:
            raise InvalidInputError("seed must be an unsigned integer")


@dataclass(frozen=True)
class Game:
    """Dense two-player zero-sum game with payoff matrix ``A`` (n x m)."""

    A: np.ndarray
    provenance: Provenance | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise InvalidInputError(f"payoff matrix must be 2-D and non-empty, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InvalidInputError("payoff matrix has non-finite entries")
        if self.provenance is not None and self.provenance.A_bar.shape != A.shape:
            raise InvalidInputError("provenance base matrix shape does not match A")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def check_simplex(values, dim: int | None = None, name: str = "strategy") -> np.ndarray:
    """Validate a probability vector and return it as a read-only float array."""
    v = np.array(values, dtype=np.float64).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise InvalidInputError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if v.shape[0] < 1 or not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} must be a non-empty finite vector")
    if np.any(v < 0):
        raise InvalidInputError(f"{name} has negative components")
    if abs(v.sum() - 1.0) > SUM_TOL:
        raise InvalidInputError(f"{name} sums to {v.sum()!r}, not 1")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class JointStrategy:
    """Pair ``z = (x, y)`` of mixed strategies."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", check_simplex(self.x, name="x"))
        object.__setattr__(self, "y", check_simplex(self.y, name="y"))

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def uniform(cls, n: int, m: int) -> "JointStrategy":
        return cls(np.full(n, 1.0 / n), np.full(m, 1.0 / m))

    @classmethod
    def from_vector(cls, z, n: int) -> "JointStrategy":
        z = np.asarray(z, dtype=np.float64)
        return cls(z[:n], z[n:])

    def distance(self, other: "JointStrategy") -> float:
        return float(np.linalg.norm(self.z - other.z))


@dataclass(frozen=True)
class TrajectoryRecord:
    iter: int
    phi: float
    dist_to_eq: float | None = None


@dataclass(frozen=True)
class Trajectory(Sequence[TrajectoryRecord]):
    """Recorded iterates stored column-wise; indexes as ``TrajectoryRecord``."""

    iters: np.ndarray
    phi: np.ndarray
    dist: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.iters)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(len(self)))]
        d = None if self.dist is None else float(self.dist[k])
        return TrajectoryRecord(int(self.iters[k]), float(self.phi[k]), d)

    def __iter__(self) -> Iterator[TrajectoryRecord]:
        for k in range(len(self)):
            yield self[k]


def _as_vector(v, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] < 1:
        raise InvalidInputError(f"{name} must be non-empty")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return v


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    return kernels.project_simplex(_as_vector(v))


def project_joint(z, n: int) -> np.ndarray:
    z = _as_vector(z)
    return np.concatenate([project_simplex(z[:n]), project_simplex(z[n:])])


def _check_dims(g: Game, z: JointStrategy):
    if z.x.shape[0] != g.n or z.y.shape[0] != g.m:
        raise InvalidInputError(
            f"strategy dims ({z.x.shape[0]}, {z.y.shape[0]}) do not match game {g.shape}"
        )


def duality_gap(g: Game, z: JointStrategy) -> float:
    """``max_j (A^T x)_j - min_i (A y)_i``; zero exactly at equilibria."""
    _check_dims(g, z)
    return float(np.max(g.A.T @ z.x) - np.min(g.A @ z.y))


def operator_F(g: Game, z: JointStrategy) -> np.ndarray:
    """Saddle operator ``F(z) = (A y, -A^T x)``."""
    _check_dims(g, z)
    return np.concatenate([g.A @ z.y, -(g.A.T @ z.x)])


def spectral_norm(M) -> float:
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix has non-finite entries")
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(np.atleast_2d(M), compute_uv=False)[0])


# --- generators -------------------------------------------------------------

def make_illcond_game(gamma: float) -> Game:
    """The 3x3 diagonal game ``diag(gamma, 2 gamma, 1)``."""
    if not 0.0 < gamma < 1.0:
        raise InvalidInputError(f"gamma must lie in (0, 1), got {gamma}")
    return Game(np.diag([gamma, 2.0 * gamma, 1.0]))


def matching_pennies() -> Game:
    return Game(np.array([[1.0, -1.0], [-1.0, 1.0]]))


def identity_game(d: int) -> Game:
    if d < 1:
        raise InvalidInputError("dimension must be >= 1")
    return Game(np.eye(d))


def zero_game(n: int, m: int) -> Game:
    if n < 1 or m < 1:
        raise InvalidInputError("dimensions must be >= 1")
    return Game(np.zeros((n, m)))


def gaussian_perturb(A_bar, sigma: float, seed: int) -> Game:
    """Draw ``A_bar + G`` with ``G`` i.i.d. ``N(0, sigma^2)`` from a PCG64 stream."""
    A_bar = np.array(A_bar, dtype=np.float64)
    if A_bar.ndim != 2 or not np.all(np.isfinite(A_bar)):
        raise InvalidInputError("base matrix must be a finite 2-D array")
    if np.any(np.abs(A_bar) > 1.0):
        raise InvalidInputError("base matrix entries must lie in [-1, 1]")
    if not (sigma > 0.0 and sigma**2 <= 1.0):
        raise InvalidInputError(f"sigma must satisfy 0 < sigma^2 <= 1, got {sigma}")
    seed = int(seed)
    if seed < 0:
        raise InvalidInputError("seed must be an unsigned integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    G = rng.normal(0.0, sigma, size=A_bar.shape)
    return Game(A_bar + G, Provenance(A_bar, float(sigma), seed))


def derive_seed(root_seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for ``(root_seed, *keys)``.

    Independent of call order, so parallel trials reproduce serial ones.
    """
    ss = np.random.SeedSequence([int(root_seed), *map(int, keys)])
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


# --- file format ------------------------------------------------------------

def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInputError("cannot serialize non-finite number")
    return format(x, ".17g")


def _num_array(a) -> str:
    return "[" + ", ".join(_num(v) for v in np.asarray(a).reshape(-1)) + "]"


def game_to_json(g: Game) -> str:
    parts = [f'"n": {g.n}', f'"m": {g.m}', f'"A": {_num_array(g.A)}']
    if g.provenance is not None:
        p = g.provenance
        parts.append(
            f'"provenance": {{"A_bar": {_num_array(p.A_bar)}, '
            f'"sigma": {_num(p.sigma)}, "seed": {int(p.seed)}}}'
        )
    return "{" + ", ".join(parts) + "}\n"


def game_from_json(text: str) -> Game:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"game file is not valid JSON: {exc}") from exc
    try:
        n, m = int(doc["n"]), int(doc["m"])
        flat = np.asarray(doc["A"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"game file missing or malformed field: {exc}") from exc
    if n < 1 or m < 1 or flat.shape != (n * m,):
        raise InvalidInputError(f"game file: A must hold n*m = {n * m} numbers")
    prov = None
    if doc.get("provenance") is not None:
        p = doc["provenance"]
        try:
            A_bar = np.asarray(p["A_bar"], dtype=np.float64)
            prov = Provenance(A_bar.reshape(n, m), float(p["sigma"]), int(p["seed"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"game file: malformed provenance: {exc}") from exc
    return Game(flat.reshape(n, m), prov)


def write_game(g: Game, path) -> None:
    Path(path).write_text(game_to_json(g))


def read_game(path) -> Game:
    path = Path(path)
    if not path.is_file():
        raise InvalidInputError(f"game file not found: {path}")
    return game_from_json(path.read_text())
