"""Monte Carlo harness over Gaussian perturbations of a base game.

Every trial draws its own 64-bit seed from ``derive_seed(root_seed, i, k)``
(``i`` the sigma index, ``k`` the trial index), so results do not depend on
execution order or on the number of worker processes.
"""
from __future__ import annotations

import csv
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errorbound import Diagnostics, compute_alpha_beta, compute_gamma, diagnose, q_transform
from .exceptions import InvalidInputError, SolverFailureError
from .game import (Game, derive_seed, gaussian_perturb, identity_game, make_illcond_game,
                   matching_pennies, read_game, zero_game)
from .oracle import solve_and_certify
from .plotting import line_chart
from .solvers import SolverConfig, solve

TRIAL_COLUMNS = ("sigma", "seed", "nondegenerate", "alpha_P", "alpha_D", "beta_P", "beta_D",
                 "gamma_P", "gamma_D", "sigma_min_Qbar", "kappa_core", "kappa_empirical",
                 "iters_to_eps", "phi_final", "dist_final")
FIGURE_COLUMNS = ("iter", "phi_mean", "phi_std", "dist_mean", "dist_std")
DEFAULT_FIGURE_SIGMAS = (0.0, 0.05, 0.25)


def base_matrix(desc: str) -> np.ndarray:
    """Resolve a base-game description.

    Accepted: ``illcond:<gamma>``, ``zero<n>`` or ``zero<n>x<m>``,
    ``identity<d>``, ``pennies``, or a path to a game file.
    """
    s = str(desc).strip()
    if s.startswith("illcond:"):
        return make_illcond_game(float(s.split(":", 1)[1])).A
    m = re.fullmatch(r"zero(\d+)(?:x(\d+))?", s)
    if m:
        n = int(m.group(1))
        return zero_game(n, int(m.group(2) or n)).A
    m = re.fullmatch(r"identity(\d+)", s)
    if m:
        return identity_game(int(m.group(1))).A
    if s == "pennies":
        return matching_pennies().A
    return read_game(s).A


@dataclass(frozen=True)
class TrialSpec:
    base_game: str
    sigma_list: tuple
    n_trials: int
    config: SolverConfig | None = None  # None: diagnostics only, no solver run
    root_seed: int = 0
    n_samples: int = 200

    def __post_init__(self):
        object.__setattr__(self, "sigma_list", tuple(float(s) for s in self.sigma_list))
        if int(self.n_trials) < 1:
            raise InvalidInputError("n_trials must be >= 1")
        if not self.sigma_list:
            raise InvalidInputError("sigma_list is empty")
        for s in self.sigma_list:
            if not 0.0 < s <= 1.0:
                raise InvalidInputError(f"every sigma must lie in (0, 1], got {s}")
        if int(self.root_seed) < 0:
            raise InvalidInputError("root_seed must be an unsigned integer")


@dataclass(frozen=True)
class TrialOutcome:
    sigma: float
    seed: int
    nondegenerate: bool
    diagnostics: Diagnostics | None
    iters_to_eps: int | None
    phi_final: float | None
    dist_final: float | None
    support_sizes: tuple[int, int] | None = None


def _trial(args) -> TrialOutcome:
    A_bar, sigma, seed, cfg, n_samples = args
    g = gaussian_perturb(A_bar, sigma, seed)
    try:
        eq, cert = solve_and_certify(g)
    except SolverFailureError:
        return TrialOutcome(sigma, seed, False, None, None, None, None)
    sizes = (len(eq.support_x), len(eq.support_y))
    if not cert.is_nondegenerate:
        return TrialOutcome(sigma, seed, False, None, None, None, None, sizes)
    # q_transform verifies the reduced-system residuals before diagnostics are used
    diag = diagnose(g, eq, n_samples=n_samples, seed=seed, qs=q_transform(g, eq))
    iters = phi = dist = None
    if cfg is not None:
        res = solve(g, cfg, eq=eq)
        iters = res.iters_used
        phi = res.phi_final
        dist = float(np.linalg.norm(res.z_final.z - eq.z_vec))
    return TrialOutcome(sigma, seed, True, diag, iters, phi, dist, sizes)


def _map(fn, items, jobs: int):
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def run_trials(spec: TrialSpec, jobs: int = 1) -> list[TrialOutcome]:
    A_bar = base_matrix(spec.base_game)
    work = [
        (A_bar, s, derive_seed(spec.root_seed, i, k), spec.config, spec.n_samples)
        for i, s in enumerate(spec.sigma_list)
        for k in range(spec.n_trials)
    ]
    return _map(_trial, work, jobs)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def trial_rows(outcomes):
    diag_names = [f.name for f in fields(Diagnostics)]
    for o in outcomes:
        d = {name: getattr(o.diagnostics, name) if o.diagnostics else None for name in diag_names}
        row = dict(sigma=o.sigma, seed=o.seed, nondegenerate=o.nondegenerate,
                   iters_to_eps=o.iters_to_eps, phi_final=o.phi_final, dist_final=o.dist_final, **d)
        yield [_cell(row[c]) for c in TRIAL_COLUMNS]


def dump_trials_csv(outcomes, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRIAL_COLUMNS)
    w.writerows(trial_rows(outcomes))


def write_trials_csv(outcomes, path) -> None:
    with Path(path).open("w", newline="") as fh:
        dump_trials_csv(outcomes, fh)


# --- tail validators ---------------------------------------------------------

TAILS = ("beta", "gamma", "alpha")


@dataclass(frozen=True)
class TailReport:
    which: str
    eps: float
    empirical_freq: float
    paper_bound: float
    slack: float
    passed: bool
    n_trials: int
    n_nondegenerate: int
    hits: int


def tail_bound(which: str, n: int, m: int, sigma: float, eps: float) -> float:
    k = min(n, m)
    if which == "beta":
        return eps * math.e * k**2 / sigma**2
    if which == "gamma":
        return 4.0 * math.e * k**3 * eps / sigma**2
    if which == "alpha":
        return 8.0 * math.e**2 * n * m * k * eps / sigma**2
    raise InvalidInputError(f"unknown tail {which!r}; choose from {TAILS}")


def default_tail_eps(which: str, n: int, m: int, sigma: float, target: float = 0.2) -> float:
    """The ``eps`` making the probability bound equal to ``target``."""
    return target / tail_bound(which, n, m, sigma, 1.0)


def _tail_stats(args):
    """Per-trial statistics ``s`` with the tail event being ``s <= eps``."""
    A_bar, sigma, seed = args
    g = gaussian_perturb(A_bar, sigma, seed)
    try:
        eq, cert = solve_and_certify(g)
    except SolverFailureError:
        return None
    if not cert.is_nondegenerate:
        return None
    qs = q_transform(g, eq)
    aP, _, bP, _ = compute_alpha_beta(g, eq)
    gP, _ = compute_gamma(qs)
    flat = float(np.max(np.abs(g.A)))
    qcol = float(np.max(np.linalg.norm(qs.Q, axis=0))) if not qs.empty else 0.0
    return {
        "beta": bP * 5.0 * flat,
        "gamma": gP * (4.0 * qcol + 20.0 * flat + 3.0),
        "alpha": aP * 25.0 * (flat + 1.0) ** 2,
    }


def tail_statistics(n: int, m: int, sigma: float, n_trials: int, root_seed: int = 0,
                    base: np.ndarray | None = None, jobs: int = 1):
    """Normalized statistics of each trial, ``None`` for degenerate draws."""
    if not 0.0 < sigma <= 1.0:
        raise InvalidInputError(f"sigma must lie in (0, 1], got {sigma}")
    A_bar = np.zeros((n, m)) if base is None else np.asarray(base, dtype=np.float64)
    work = [(A_bar, sigma, derive_seed(root_seed, 0, k)) for k in range(n_trials)]
    return _map(_tail_stats, work, jobs)


def evaluate_tail(which: str, stats, n: int, m: int, sigma: float, eps: float) -> TailReport:
    bound = tail_bound(which, n, m, sigma, eps)
    if not bound < 0.5:
        raise InvalidInputError(f"bound {bound:.3g} is uninformative; choose eps so it is < 0.5")
    vals = [s[which] for s in stats if s is not None]
    hits = sum(1 for v in vals if v <= eps)
    nd = len(vals)
    freq = hits / nd if nd else 0.0
    slack = 3.0 * math.sqrt(bound * (1.0 - bound) / max(nd, 1)) + 1.0 / max(nd, 1)
    return TailReport(which, eps, freq, bound, slack, freq <= bound + slack, len(stats), nd, hits)


def _validate(which, n, m, sigma, n_trials, eps, root_seed, jobs):
    eps = default_tail_eps(which, n, m, sigma) if eps is None else float(eps)
    if eps < 0:
        raise InvalidInputError("eps must be nonnegative")
    stats = tail_statistics(n, m, sigma, n_trials, root_seed, jobs=jobs)
    return evaluate_tail(which, stats, n, m, sigma, eps)


def validate_tail_beta(nm, sigma: float, n_trials: int, eps: float | None = None,
                       root_seed: int = 0, jobs: int = 1) -> TailReport:
    return _validate("beta", *nm, sigma, n_trials, eps, root_seed, jobs)


def validate_tail_gamma(nm, sigma: float, n_trials: int, eps: float | None = None,
                        root_seed: int = 0, jobs: int = 1) -> TailReport:
    return _validate("gamma", *nm, sigma, n_trials, eps, root_seed, jobs)


def validate_tail_alpha(nm, sigma: float, n_trials: int, eps: float | None = None,
                        root_seed: int = 0, jobs: int = 1) -> TailReport:
    return _validate("alpha", *nm, sigma, n_trials, eps, root_seed, jobs)


# --- figure reproduction -----------------------------------------------------

def _figure_run(args):
    A, sigma, seed, iters = args
    if sigma == 0.0:
        g = Game(A)
    else:
        g = gaussian_perturb(A, sigma, seed)
    eq, _ = solve_and_certify(g)
    cfg = SolverConfig("ogda", max_iters=iters, early_stop=False)
    res = solve(g, cfg, eq=eq)
    return res.trajectory.phi[:iters], res.trajectory.dist[:iters]


def _tag(v: float) -> str:
    return format(float(v), "g")


def figure_paths(out_dir, gamma: float, sigma_values):
    out_dir = Path(out_dir)
    csvs = [out_dir / f"figure_gamma{_tag(gamma)}_sigma{_tag(s)}.csv" for s in sigma_values]
    svgs = [out_dir / f"figure_gamma{_tag(gamma)}_phi.svg", out_dir / f"figure_gamma{_tag(gamma)}_dist.svg"]
    return csvs, svgs


def reproduce_figure(gamma: float = 0.25, sigma_values=DEFAULT_FIGURE_SIGMAS, n_seeds: int = 10,
                     iters: int = 1000, out_path=".", root_seed: int = 0, jobs: int = 1):
    """Run OGDA on the ill-conditioned game and its perturbations; write CSV and SVG files.

    ``sigma = 0`` is a single deterministic run of the unperturbed game, so its
    std columns are exactly zero. Returns the list of written paths.
    """
    if iters < 1 or n_seeds < 1:
        raise InvalidInputError("iters and n_seeds must be >= 1")
    sigma_values = tuple(float(s) for s in sigma_values)
    for s in sigma_values:
        if not 0.0 <= s <= 1.0:
            raise InvalidInputError(f"sigma must lie in [0, 1], got {s}")
    A = make_illcond_game(gamma).A
    out_dir = Path(out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    csvs, svgs = figure_paths(out_dir, gamma, sigma_values)

    work, slots = [], []
    for i, s in enumerate(sigma_values):
        count = 1 if s == 0.0 else n_seeds
        for k in range(count):
            work.append((A, s, derive_seed(root_seed, i, k), iters))
            slots.append(i)
    runs = _map(_figure_run, work, jobs)

    iter_axis = np.arange(iters)
    phi_series, dist_series = [], []
    for i, s in enumerate(sigma_values):
        phi = np.array([r[0] for r, j in zip(runs, slots) if j == i])
        dist = np.array([r[1] for r, j in zip(runs, slots) if j == i])
        stats = (phi.mean(axis=0), phi.std(axis=0), dist.mean(axis=0), dist.std(axis=0))
        with csvs[i].open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FIGURE_COLUMNS)
            for t in range(iters):
                w.writerow([t] + [format(float(col[t]), ".17g") for col in stats])
        phi_series.append((f"sigma={_tag(s)}", iter_axis, stats[0]))
        dist_series.append((f"sigma={_tag(s)}", iter_axis, stats[2]))

    svgs[0].write_text(line_chart(phi_series, f"OGDA duality gap, gamma={_tag(gamma)}",
                                  "iteration", "mean duality gap (log10)", log_y=True))
    svgs[1].write_text(line_chart(dist_series, f"OGDA distance to equilibrium, gamma={_tag(gamma)}",
                                  "iteration", "mean distance to equilibrium"))
    return csvs + svgs
