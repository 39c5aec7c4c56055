"""Time the numba and numpy/scipy versions of the sampler kernels.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from cvent import kernels
from cvent._accel import NUMBA_AVAILABLE
from cvent.sampler import LAB_BAND, design_bandpass


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, args.n))
    sos = design_bandpass(LAB_BAND)
    edges = kernels.block_edges(args.n, 100)

    cases = {
        "sosfilt": (lambda: kernels.sosfilt_numpy(sos, x), lambda: kernels.sosfilt_numba(sos, x)),
        "block_moments": (
            lambda: kernels.block_moments_numpy(x, y, edges),
            lambda: kernels.block_moments_numba(x, y, edges),
        ),
    }
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<15}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, (np_fn, nb_fn) in cases.items():
        t_np = best_of(np_fn, args.repeat)
        if NUMBA_AVAILABLE:
            nb_fn()  # compile outside the timing
            t_nb = best_of(nb_fn, args.repeat)
            print(f"{name:<15}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.2f}x")
        else:
            print(f"{name:<15}{t_np * 1e3:>12.2f}{'n/a':>12}{'':>10}")


if __name__ == "__main__":
    main()
