"""Command-line interface: ``saddlebench <subcommand> ...``.

Exit codes: 0 ok, 1 usage or input error, 2 non-convergence, 3 degenerate
game, 4 statistical validator failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import errorbound, lab
from .exceptions import SaddleBenchError, StepSizeTooLargeError
from .game import identity_game, make_illcond_game, matching_pennies, read_game, zero_game
from .oracle import solve_and_certify
from .solvers import ALGORITHMS, SolverConfig, solve, write_trajectory_csv

EXIT_OK, EXIT_USAGE, EXIT_NONCONV, EXIT_DEGENERATE, EXIT_STAT = 0, 1, 2, 3, 4
SEED_ENV = "SADDLEBENCH_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_game_source(p):
    p.add_argument("game_file", nargs="?", help="JSON game file")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--illcond-gamma", type=float, metavar="G", help="diag(G, 2G, 1) game")
    grp.add_argument("--matching-pennies", action="store_true")
    grp.add_argument("--identity", type=int, metavar="D", help="D x D identity game")
    grp.add_argument("--zero", type=int, nargs=2, metavar=("N", "M"), help="N x M zero game")


def _game_from_args(args):
    named = [args.illcond_gamma is not None, args.matching_pennies,
             args.identity is not None, args.zero is not None]
    if args.game_file is not None and any(named):
        raise SaddleBenchError("give either a game file or a generator flag, not both")
    if args.illcond_gamma is not None:
        return make_illcond_game(args.illcond_gamma)
    if args.matching_pennies:
        return matching_pennies()
    if args.identity is not None:
        return identity_game(args.identity)
    if args.zero is not None:
        return zero_game(*args.zero)
    if args.game_file is None:
        raise SaddleBenchError("no game given: pass a game file or a generator flag")
    return read_game(args.game_file)


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise SaddleBenchError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _echo(args, **resolved):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg.update(resolved)
    print("config: " + json.dumps(cfg, sort_keys=True, default=str), file=sys.stderr)


def _print_certificate(cert):
    print(f"degenerate game: is_nondegenerate={cert.is_nondegenerate} "
          f"tight_count_x={cert.tight_count_x} tight_count_y={cert.tight_count_y} "
          f"unique={cert.unique} complementarity_ok={cert.complementarity_ok}", file=sys.stderr)


def cmd_solve(args) -> int:
    g = _game_from_args(args)
    seed = _resolve_seed(args)
    cfg = SolverConfig(args.algo, eta=args.eta, eps=args.eps, max_iters=args.max_iters, rho=args.rho,
                       record_every=args.record_every, allow_large_eta=args.allow_large_eta)
    _echo(args, seed=seed, eta=cfg.resolved_eta(g) if cfg.algorithm != "itersmooth" else None)
    eq = solve_and_certify(g)[0] if args.oracle else None
    try:
        res = solve(g, cfg, eq=eq)
    except StepSizeTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    if args.out:
        write_trajectory_csv(res, args.out)
    print(f"algorithm={res.algorithm} iters={res.iters_used} phi_final={res.phi_final!r} "
          f"converged={str(res.converged).lower()}")
    return EXIT_OK if res.converged else EXIT_NONCONV


def _certified(g):
    eq, cert = solve_and_certify(g)
    if not cert.is_nondegenerate:
        _print_certificate(cert)
        return None
    return eq


def cmd_diagnose(args) -> int:
    g = _game_from_args(args)
    seed = _resolve_seed(args)
    _echo(args, seed=seed)
    eq = _certified(g)
    if eq is None:
        return EXIT_DEGENERATE
    diag = errorbound.diagnose(g, eq, n_samples=args.samples, seed=seed)
    report = errorbound.report_dict(diag)
    sys.stdout.write(errorbound.report_to_text(report))
    if args.out:
        Path(args.out).write_text(errorbound.report_to_json(report))
    return EXIT_OK


def cmd_stability(args) -> int:
    g = _game_from_args(args)
    seed = _resolve_seed(args)
    _echo(args, seed=seed)
    eq = _certified(g)
    if eq is None:
        return EXIT_DEGENERATE
    stab = errorbound.stability_bounds(g, eq, n_directions=args.directions, seed=seed)
    report = errorbound.report_dict(None, stab)
    sys.stdout.write(errorbound.report_to_text(report))
    if args.out:
        Path(args.out).write_text(errorbound.report_to_json(report))
    return EXIT_OK


def cmd_trials(args) -> int:
    seed = _resolve_seed(args)
    cfg = None
    if args.algo != "none":
        cfg = SolverConfig(args.algo, eta=args.eta, eps=args.eps, max_iters=args.max_iters,
                           record_every=max(1, args.max_iters))
    spec = lab.TrialSpec(args.base, tuple(args.sigma), args.trials, cfg, seed, args.samples)
    _echo(args, seed=seed)
    outcomes = lab.run_trials(spec, jobs=args.jobs)
    if args.out:
        lab.write_trials_csv(outcomes, args.out)
    else:
        lab.dump_trials_csv(outcomes, sys.stdout)
    nd = sum(o.nondegenerate for o in outcomes)
    print(f"trials={len(outcomes)} nondegenerate={nd}", file=sys.stderr)
    return EXIT_OK


def cmd_tails(args) -> int:
    seed = _resolve_seed(args)
    which = lab.TAILS if args.which == "all" else (args.which,)
    eps = {w: (args.eps if args.eps is not None else lab.default_tail_eps(w, args.n, args.m, args.sigma))
           for w in which}
    _echo(args, seed=seed, eps_resolved=eps)
    stats = lab.tail_statistics(args.n, args.m, args.sigma, args.trials, seed, jobs=args.jobs)
    reports = [lab.evaluate_tail(w, stats, args.n, args.m, args.sigma, eps[w]) for w in which]
    for r in reports:
        print(f"which={r.which} eps={r.eps!r} empirical_freq={r.empirical_freq!r} "
              f"paper_bound={r.paper_bound!r} slack={r.slack!r} pass={str(r.passed).lower()} "
              f"nondegenerate={r.n_nondegenerate}/{r.n_trials}")
    if args.out:
        doc = [{k: getattr(r, k) for k in r.__dataclass_fields__} for r in reports]
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_STAT


def cmd_figure(args) -> int:
    seed = _resolve_seed(args)
    _echo(args, seed=seed)
    paths = lab.reproduce_figure(args.gamma, tuple(args.sigmas), args.seeds, args.iters,
                                 args.out_dir, seed, jobs=args.jobs)
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="saddlebench", description="Zero-sum matrix game solvers and conditioning diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run a first-order solver and write its trajectory")
    _add_game_source(p)
    p.add_argument("--algo", choices=ALGORITHMS, default="ogda")
    p.add_argument("--eta", type=float, default=None, help="step size (default depends on --algo)")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=10**6)
    p.add_argument("--rho", type=float, default=2.0, help="itersmooth shrink factor")
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--allow-large-eta", action="store_true")
    p.add_argument("--oracle", action="store_true", help="fill dist_to_eq from the exact equilibrium")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="trajectory CSV path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("diagnose", help="conditioning diagnostics of a non-degenerate game")
    _add_game_source(p)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("stability", help="support-stability bounds")
    _add_game_source(p)
    p.add_argument("--directions", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("trials", help="Monte Carlo trials over Gaussian perturbations")
    p.add_argument("--base", required=True, help="illcond:<g>, zero<n>[x<m>], identity<d>, pennies or a file")
    p.add_argument("--sigma", type=float, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--algo", choices=ALGORITHMS + ("none",), default="none")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=10**6)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="trial CSV path (default: stdout)")
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("tails", help="validate tail bounds of beta, gamma, alpha")
    p.add_argument("--which", choices=lab.TAILS + ("all",), default="all")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=400)
    p.add_argument("--eps", type=float, default=None, help="default: bound equals 0.2")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_tails)

    p = sub.add_parser("figure", help="OGDA trajectories on the ill-conditioned game")
    p.add_argument("--gamma", type=float, default=0.25)
    p.add_argument("--sigmas", type=float, nargs="+", default=list(lab.DEFAULT_FIGURE_SIGMAS))
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SaddleBenchError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
