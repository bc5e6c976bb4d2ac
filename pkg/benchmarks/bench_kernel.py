"""Compare the compiled and pure-Python event loops on the same runs.

    python3 benchmarks/bench_kernel.py [--duration 5] [--repeat 3]
"""
import argparse
import math
import time

import numpy as np

from axsr.desim import available_backends, run
from axsr.scenario import grid_setup, sr_mask, toy_setup, with_obss_pd


def cases(duration):
    grid = grid_setup(15, 0)
    yield "toy1 saturated", toy_setup(1), math.inf, duration
    yield "grid9 12 Mbps legacy", grid, 12e6, duration
    yield "grid9 120 Mbps SR -68", with_obss_pd(grid, sr_mask("only_A", 9), -68.0), 120e6, duration


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration", type=float, default=5.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':28s} {'events':>9s} " + " ".join(f"{b + ' s':>12s}" for b in backends) + "  speedup")
    for name, sc, load, dur in cases(args.duration):
        times, reports = {}, {}
        for b in backends:
            best = math.inf
            for _ in range(args.repeat):
                t = time.perf_counter()
                reports[b] = run(sc, load, 64, dur, 0, backend=b)
                best = min(best, time.perf_counter() - t)
            times[b] = best
        if len(backends) == 2:
            same = np.array_equal(reports["compiled"].throughput, reports["python"].throughput)
            speed = f"{times['python'] / times['compiled']:7.1f}x{'' if same else ' MISMATCH'}"
        else:
            speed = "n/a"
        ev = reports[backends[0]].n_events
        print(f"{name:28s} {ev:9d} " + " ".join(f"{times[b]:12.3f}" for b in backends) + f"  {speed}")


if __name__ == "__main__":
    main()
