#!/usr/bin/env python3
"""Throughput comparison: compiled kernel vs the pure-Python engine.

Both paths produce identical executions (see tests/test_kernel_equivalence);
this measures rounds per second on a few representative configurations.

Run: python benchmarks/bench_kernel.py [--rounds N]
"""

import argparse
import time

from macsim.channel import ChannelConfig
from macsim.dispatch import AdversarySpec, kernel_available, run_execution
from macsim.engine import FixedHorizon

CASES = [
    ("rrw", 10, "0.9"),
    ("rrw", 250, "0.9"),
    ("srr", 25, "0.8"),
    ("mbtf", 250, "0.9"),
    ("counting-backoff", 10, "0.7"),
    ("queue-backoff", 10, "0.9"),
    ("quadruple-round", 10, "0.3"),
    ("beb-capped", 10, "0.7"),
]


def time_run(algorithm, n, rho, rounds, force_pure):
    from macsim.algorithms import station_class

    cfg = ChannelConfig(n, station_class(algorithm).requires_cd)
    spec = AdversarySpec("randomized", rho, "10")
    start = time.perf_counter()
    report = run_execution(cfg, algorithm, spec, 1, FixedHorizon(rounds), force_pure=force_pure)
    elapsed = time.perf_counter() - start
    return elapsed, report


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=int, default=200_000)
    parser.add_argument("--pure-rounds", type=int, default=20_000,
                        help="shorter horizon for the pure engine")
    args = parser.parse_args()

    if not kernel_available():
        print("compiled kernel not available; only timing the pure engine")
    print(f"{'algorithm':<18} {'n':>4} {'rho':>5} {'pure rounds/s':>14} {'kernel rounds/s':>16} {'speedup':>8}")
    for algorithm, n, rho in CASES:
        pure_t, _ = time_run(algorithm, n, rho, args.pure_rounds, force_pure=True)
        pure_rps = args.pure_rounds / pure_t
        if kernel_available():
            fast_t, _ = time_run(algorithm, n, rho, args.rounds, force_pure=False)
            fast_rps = args.rounds / fast_t
            print(f"{algorithm:<18} {n:>4} {rho:>5} {pure_rps:>14,.0f} {fast_rps:>16,.0f} {fast_rps / pure_rps:>7.1f}x")
        else:
            print(f"{algorithm:<18} {n:>4} {rho:>5} {pure_rps:>14,.0f} {'-':>16} {'-':>8}")


if __name__ == "__main__":
    main()
