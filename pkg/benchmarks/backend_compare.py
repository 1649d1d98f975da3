"""Head-to-head timing of the compiled kernels against the numpy fallback.

Times the three hot kernels (per-patch statistics, the block-reveal loop,
the symmetric eigensolve) on matched inputs under both backends and prints
median wall time plus the speedup. Thread pools are pinned to one thread so
the comparison measures the kernels, not the host's BLAS configuration.

Usage: python3 benchmarks/backend_compare.py [--iters N]
"""

import argparse
import statistics
import time

import numpy as np
from threadpoolctl import threadpool_limits

from specmask import _kernels_py
from specmask.sampling import SeededRng

try:
    from specmask import _kernels as _compiled
except ImportError:
    _compiled = None


def median_ns(fn, iters):
    times = []
    for _ in range(iters):
        t0 = time.perf_counter_ns()
        fn()
        times.append(time.perf_counter_ns() - t0)
    return statistics.median(times)


def noise(rows, cols, seed):
    u = SeededRng(seed).doubles(rows * cols)
    return np.ascontiguousarray(u.reshape(rows, cols) - 0.5)


def stat_cases():
    for fp, tp, ph, pw in [(16, 16, 4, 4), (32, 64, 8, 8), (64, 64, 16, 16)]:
        data = noise(fp * ph, tp * pw, fp)
        label = f"patch_stats {fp}x{tp} grid, {ph}x{pw} patches"
        yield label, lambda k, d=data, a=fp, b=tp, c=ph, e=pw: k.patch_stats(
            d, a, b, c, e, k.MAD
        )


def reveal_cases():
    rng = np.random.default_rng(0)
    for fp, tp in [(32, 32), (64, 128)]:
        n = fp * tp
        rows = rng.integers(0, fp, size=n).astype(np.int64)
        cols = rng.integers(0, tp, size=n).astype(np.int64)
        n_keep = int(0.3 * n)
        label = f"reveal_blocks {fp}x{tp} grid, 5x5 blocks"

        def run(k, fp=fp, tp=tp, rows=rows, cols=cols, n_keep=n_keep):
            visible = np.zeros((fp, tp), dtype=np.uint8)
            return k.reveal_blocks(visible, rows, cols, 5, 5, n_keep, 0)

        yield label, run


def eig_cases():
    for n in [64, 128, 256, 512]:
        m = noise(n, n, n)
        sym = np.ascontiguousarray((m + m.T) / 2.0)
        yield f"fiedler_vector {n}x{n}", lambda k, a=sym: k.fiedler_vector(a)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=25)
    args = parser.parse_args()

    if _compiled is None:
        raise SystemExit("compiled extension not built; run: python3 setup.py build_ext --inplace")

    print(f"{'kernel':42s} {'compiled':>12s} {'python':>12s} {'speedup':>8s}")
    with threadpool_limits(1):
        for label, run in [*stat_cases(), *reveal_cases(), *eig_cases()]:
            run(_compiled)  # warm both paths before timing
            run(_kernels_py)
            t_c = median_ns(lambda: run(_compiled), args.iters)
            t_p = median_ns(lambda: run(_kernels_py), args.iters)
            print(f"{label:42s} {t_c / 1e6:9.3f} ms {t_p / 1e6:9.3f} ms {t_p / t_c:7.2f}x")


if __name__ == "__main__":
    main()
