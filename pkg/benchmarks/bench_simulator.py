"""Throughput of the compiled simulator kernel against the pure-Python fallback.

    python benchmarks/bench_simulator.py [--slots N] [--repeat R]

Both backends consume the same random stream, so the script also checks
that they return identical averages.
"""

import argparse
import dataclasses
import statistics
import time

from aoisrp.model import ChannelModel, Constraints, CostVector, SourceChain, SrpPolicy, SystemConfig
from aoisrp.simulator import available_backends, simulate

CONFIG = SystemConfig(
    SourceChain(0.15, 0.2),
    ChannelModel(0.3, 0.2, 0.9, 0.6),
    CostVector(1.2, 0.8, 1.4),
    Constraints(a_bar=3.0, c_bar=0.5),
)
POLICY = SrpPolicy(0.4, 0.2, 0.1, 0.3)


def time_backend(backend, slots, repeat):
    times, result = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        result = simulate(CONFIG, POLICY, slots, warmup=0, seed=1, backend=backend)
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--slots", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rows = {}
    for backend in available_backends():
        best, median, result = time_backend(backend, args.slots, args.repeat)
        rows[backend] = (best, result)
        print(f"{backend:>7}: best {best * 1e3:9.1f} ms  median {median * 1e3:9.1f} ms  "
              f"{args.slots / best / 1e6:7.2f} Mslots/s")
    if set(rows) >= {"cython", "python"}:
        fast, slow = rows["cython"], rows["python"]
        print(f"speedup: {slow[0] / fast[0]:.1f}x")
        same = dataclasses.replace(fast[1], backend="python") == slow[1]
        print(f"identical results: {same}")
    else:
        print("compiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    main()
