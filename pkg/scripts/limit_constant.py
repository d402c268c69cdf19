"""Estimate E[-V] of the Brownian limit pair and compare with -zeta(1/2)/sqrt(2 pi)."""
import argparse
import math

import mpmath

from levyzoom.attraction import Brownian
from levyzoom.experiments import default_threads, run_limit_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[10_000, 100_000, 1_000_000])
    ap.add_argument("--k-window", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=default_threads())
    args = ap.parse_args()
    oracle = float(-mpmath.zeta(0.5) / mpmath.sqrt(2 * mpmath.pi))
    print(f"oracle {oracle:.5f}")
    for n in args.n:
        res = run_limit_experiment(Brownian(1.0), n, args.k_window, args.seed, args.threads)
        v = res.minus_v.samples
        se = v.std(ddof=1) / math.sqrt(n)
        print(f"n={n:>8}  mean {v.mean():.5f} +- {se:.5f}  z {(v.mean() - oracle) / se:+.2f}")


if __name__ == "__main__":
    main()
