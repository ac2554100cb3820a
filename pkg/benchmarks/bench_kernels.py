"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--iters N] [--repeat R] [--out results.json]

Each solver kernel runs a fixed number of steps (early stopping off) on a
perturbed 3x3 game and a 20x20 Gaussian game; the best of ``--repeat`` wall
times is reported for each backend, with the speedup and a check that both
backends produced the same final iterate.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from saddlebench.game import derive_seed, gaussian_perturb, make_illcond_game, spectral_norm
from saddlebench.kernels import compiled_available, get_backend


def _cases(iters):
    small = gaussian_perturb(make_illcond_game(0.25).A, 0.1, derive_seed(0, 0)).A
    large = gaussian_perturb(np.zeros((20, 20)), 1.0, derive_seed(0, 1)).A
    for label, A in (("3x3", small), ("20x20", large)):
        n, m = A.shape
        x0, y0 = np.full(n, 1.0 / n), np.full(m, 1.0 / m)
        L = spectral_norm(A)
        eta = 1.0 / (8.0 * L)
        yield f"ogda {label}", lambda k, A=A, x0=x0, y0=y0, eta=eta: k.run_ogda(
            A, x0, y0, eta, 1e-300, iters, iters, False)
        yield f"egda {label}", lambda k, A=A, x0=x0, y0=y0, eta=eta: k.run_egda(
            A, x0, y0, eta, 1e-300, iters, iters, False)
        yield f"omwu {label}", lambda k, A=A, eta=eta: k.run_omwu(A, eta, 1e-300, iters, iters, False)
        yield f"smoothing {label}", lambda k, A=A, x0=x0, y0=y0, L=L: k.smoothing(A, x0, y0, 1e-12, L, iters)


def _best(fn, kernel, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(kernel)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--out", help="optional JSON results path")
    args = ap.parse_args(argv)
    if not compiled_available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    cy, py = get_backend("cython"), get_backend("python")
    rows = []
    print(f"{'kernel':<18}{'cython [s]':>12}{'python [s]':>12}{'speedup':>10}  same")
    for name, fn in _cases(args.iters):
        t_cy, out_cy = _best(fn, cy, args.repeat)
        t_py, out_py = _best(fn, py, args.repeat)
        same = bool(np.allclose(out_cy[0], out_py[0], atol=1e-12) and np.allclose(out_cy[1], out_py[1], atol=1e-12))
        rows.append(dict(kernel=name, iters=args.iters, cython_s=t_cy, python_s=t_py,
                         speedup=t_py / t_cy, same_result=same))
        print(f"{name:<18}{t_cy:>12.4f}{t_py:>12.4f}{t_py / t_cy:>10.1f}  {same}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
