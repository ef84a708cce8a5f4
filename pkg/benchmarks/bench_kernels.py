"""Time the sphere-search kernel: compiled extension vs the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--starts 64] [--iters 500]
"""
import argparse
import time

import numpy as np

from trirev import _kernels_py
from trirev.rng import random_vector, stream, tie_seed

try:
    from trirev import _kernels as _compiled
except ImportError:
    _compiled = None

# (label, m, n, real_mode, norm exponent or None for inf, aggregate exponent or None for inf)
CASES = [
    ("lp2 real n=3 m=2 p=2", 2, 3, True, 2.0, 2.0),
    ("lp3 complex n=5 m=4 p=3", 4, 5, False, 3.0, 3.0),
    ("lp1 real n=5 m=3 p=1", 3, 5, True, 1.0, 1.0),
    ("lpinf real n=8 m=6 p=inf", 6, 8, True, None, None),
    ("lp4 complex n=16 m=8 p=2", 8, 16, False, 4.0, 2.0),
]


def _inputs(case, starts, seed=0):
    _, m, n, real, _, _ = case
    rng = stream(seed, "bench", case[0])
    A = np.array([random_vector(rng, n, real) for _ in range(m)])
    S = np.array([random_vector(rng, n, real) for _ in range(starts)])
    seeds = [tie_seed(rng) for _ in range(starts)]
    return A, S, seeds


def _run(impl, case, A, S, seeds, iters, polish):
    _, _, _, real, np_, agg = case
    return impl.sphere_search(A, real, np_ is None, np_ or 0.0, agg is None, agg or 0.0,
                              S, seeds, iters, polish)


def _best(fn, repeat):
    t = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        t.append(time.perf_counter() - t0)
    return min(t), out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--starts", type=int, default=64)
    ap.add_argument("--iters", type=int, default=500)
    ap.add_argument("--polish", type=int, default=200)
    a = ap.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; only the numpy fallback is timed")
    print(f"{'case':30s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speedup':>8s} {'max |dv|':>10s}")
    for case in CASES:
        A, S, seeds = _inputs(case, a.starts)
        tp, (vp, _) = _best(lambda: _run(_kernels_py, case, A, S, seeds, a.iters, a.polish), a.repeat)
        if _compiled is None:
            print(f"{case[0]:30s} {tp:10.4f} {'-':>11s}")
            continue
        tc, (vc, _) = _best(lambda: _run(_compiled, case, A, S, seeds, a.iters, a.polish), a.repeat)
        dv = float(np.max(np.abs(vp - vc)))
        print(f"{case[0]:30s} {tp:10.4f} {tc:11.4f} {tp / tc:7.1f}x {dv:10.2e}")


if __name__ == "__main__":
    main()
