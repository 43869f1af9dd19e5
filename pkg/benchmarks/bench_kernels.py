"""Benchmark the compiled radio kernel against the pure-NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 2000]
"""

import argparse
import time

import numpy as np

from orchid._core import kernels_py, radio_constants
from orchid.config import ChannelParams

try:
    from orchid._core import _kernels
except ImportError:
    _kernels = None


def make_case(n_uavs, n_users, seed=0):
    rng = np.random.default_rng(seed)
    uav = np.ascontiguousarray(np.column_stack([
        rng.uniform(0, 1000, (n_uavs, 2)), rng.uniform(80, 120, n_uavs)]))
    tx = np.ascontiguousarray(rng.uniform(20.0, 23.0, n_uavs))
    users = np.ascontiguousarray(rng.uniform(0, 1000, (n_users, 2)))
    gbs = np.array([500.0, 500.0, 30.0])
    consts = radio_constants(ChannelParams(), 10e6, 0.0, 50.0)
    return uav, tx, users, gbs, consts


def bench(fn, case, repeat):
    fn(*case)  # warm-up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*case)
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=2000)
    args = parser.parse_args()

    cases = {
        "desk  (N=3,  M=13)": make_case(3, 13),
        "table (N=6,  M=40)": make_case(6, 40),
        "large (N=12, M=200)": make_case(12, 200),
    }
    print(f"{'case':<22}{'numpy':>12}{'compiled':>12}{'speedup':>9}")
    for name, case in cases.items():
        t_py = bench(kernels_py.radio_snapshot, case, args.repeat)
        if _kernels is None:
            print(f"{name:<22}{t_py * 1e6:>10.1f}us{'n/a':>12}{'':>9}")
            continue
        t_c = bench(_kernels.radio_snapshot, case, args.repeat)
        print(f"{name:<22}{t_py * 1e6:>10.1f}us{t_c * 1e6:>10.1f}us"
              f"{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
