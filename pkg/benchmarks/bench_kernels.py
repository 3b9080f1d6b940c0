"""Time the compiled and numpy kernels on the same decision workloads.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (workload, backend) with the best wall time and checks
that both backends return identical arrays.
"""

import argparse
import time

import numpy as np

from credal_lp import kernels
from credal_lp.decision import build_candidates, choose_punishment, discretize, filter_candidates
from credal_lp.model import UncertainLp
from credal_lp.uncertainty import Cdf, Contamination, DiscreteDistribution, Interval, PBox


def workload():
    pbox = PBox(Interval(0.8, 1.6), Cdf((1.0, 1.6), (0.0, 1.0)), Cdf((0.8, 1.4), (0.0, 1.0)))
    cont = Contamination(DiscreteDistribution((1.0, 1.2), (0.5, 0.5)), 0.2, Interval(0.8, 1.4))
    problem = UncertainLp([Interval(2.5, 3.5), Interval(1.5, 2.5)],
                          [[cont, pbox], [pbox, Interval(0.4, 0.6)]],
                          [Interval(5, 7), PBox(Interval(4, 6), Cdf((4.5, 6.0), (0.0, 1.0)),
                                                Cdf((4.0, 5.5), (0.0, 1.0)))],
                          [(0, 5), (0, 5)])
    cands = filter_candidates(problem, build_candidates(problem, 21))
    L = choose_punishment(problem, cands)
    disc = discretize(problem.joint(), 8)
    X = cands.points
    rng = np.random.default_rng(0)
    pairs = rng.integers(0, len(X), size=(2000, 2))
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    return disc, X, pairs, L


def best_time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    disc, X, pairs, L = workload()
    impls = kernels.backends()
    print(f"candidates={len(X)} row boxes={len(disc.r_mass)} u boxes={len(disc.u_mass)} pairs={len(pairs)}")
    results = {}
    for name, mod in impls.items():
        sl = slice(disc.row_start[0], disc.row_start[1])
        t1, fm = best_time(lambda: mod.feasible_mass(X, disc.y_hi[sl], disc.z_lo[sl], disc.r_mass[sl]), args.repeat)
        t2, ud = best_time(lambda: mod.upper_diff_pairs(X, pairs, disc.y_lo, disc.y_hi, disc.z_lo, disc.z_hi,
                                                        disc.r_mass, disc.row_start, disc.u_lo, disc.u_hi,
                                                        disc.u_mass, L), args.repeat)
        results[name] = (fm, ud)
        print(f"feasible_mass     {name:7s} {t1 * 1e3:10.2f} ms")
        print(f"upper_diff_pairs  {name:7s} {t2 * 1e3:10.2f} ms")
    if len(results) == 2:
        (fa, ua), (fb, ub) = results.values()
        print("identical outputs:", bool(np.array_equal(fa, fb) and np.array_equal(ua, ub)))
    else:
        print("compiled backend unavailable; only the numpy kernels were timed")


if __name__ == "__main__":
    main()
