#!/usr/bin/env python3
"""Benchmark the joint bilateral filter backends against each other.

Runs the compiled kernel and the pure-numpy fallback on the same inputs,
checks they agree, and reports wall times and the speedup ratio.

Usage: python3 benchmarks/bench_jbf.py [--repeats N]
"""

import argparse
import time

import numpy as np

from hsindt._kernels import BACKENDS, DEFAULT_BACKEND, joint_bilateral

CASES = (
    # (lines, samples, bands, sigma_d, sigma_r, half)
    (128, 128, 8, 2.0, 0.1, 4),
    (256, 256, 16, 2.0, 0.1, 4),
    (620, 336, 32, 2.0, 0.1, 4),
)


def run_case(lines, samples, bands, sigma_d, sigma_r, half, repeats):
    rng = np.random.default_rng(0)
    vals = rng.uniform(size=(bands, lines, samples))
    guide = rng.uniform(size=(lines, samples))

    results = {}
    times = {}
    for backend in BACKENDS:
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            out = joint_bilateral(vals, guide, sigma_d, sigma_r,
                                  half, half, backend=backend)
            best = min(best, time.perf_counter() - t0)
        results[backend] = out
        times[backend] = best

    outs = list(results.values())
    agree = max(float(np.abs(a - outs[0]).max()) for a in outs)
    return times, agree


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats per case (best-of)")
    args = parser.parse_args()

    print(f"backends available: {', '.join(BACKENDS)} "
          f"(default: {DEFAULT_BACKEND})")
    header = f"{'cube':>16} {'window':>7}"
    for b in BACKENDS:
        header += f" {b + ' [s]':>12}"
    if len(BACKENDS) > 1:
        header += f" {'speedup':>8} {'max |diff|':>11}"
    print(header)

    for lines, samples, bands, sd, sr, half in CASES:
        times, agree = run_case(lines, samples, bands, sd, sr, half,
                                args.repeats)
        row = (f"{lines}x{samples}x{bands:>3}".rjust(16)
               + f"{2 * half + 1}x{2 * half + 1}".rjust(8))
        for b in BACKENDS:
            row += f" {times[b]:>12.4f}"
        if len(BACKENDS) > 1:
            ratio = times["python"] / times["cython"]
            row += f" {ratio:>7.1f}x {agree:>11.2e}"
        print(row)


if __name__ == "__main__":
    main()
