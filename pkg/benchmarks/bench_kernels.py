"""Compare the compiled and pure-Python kernels.

Usage: python benchmarks/bench_kernels.py [--paths N] [--repeat R]

Times weighted PAVA on a survival-sized increment vector and the batched D
statistic on Monte Carlo paths (default grid c=6, h=0.01), and checks that
both backends return the same numbers.
"""

import argparse
import timeit

import numpy as np

from monohaz import _pykernels, kernels
from monohaz.limit_process import sample_paths


def bench(label, fn, repeat):
    best = min(timeit.repeat(fn, number=1, repeat=repeat))
    print(f"  {label:<10s} {best * 1e3:10.2f} ms")
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled extension not available; build it with "
                         "pip install -e . --no-build-isolation")
    backends = {"cython": kernels.compiled, "python": _pykernels}
    rng = np.random.default_rng(0)

    n = 5000
    num = (rng.uniform(size=n) < 0.7).astype(float)
    den = rng.exponential(size=n)
    print(f"isotonic_blocks, n={n}")
    t = {k: bench(k, lambda b=b: b.isotonic_blocks(num, den), args.repeat)
         for k, b in backends.items()}
    s1, v1 = backends["cython"].isotonic_blocks(num, den)
    s2, v2 = backends["python"].isotonic_blocks(num, den)
    assert np.array_equal(s1, s2) and np.allclose(v1, v2, rtol=1e-13)
    print(f"  speedup    {t['python'] / t['cython']:10.1f}x")

    paths = sample_paths(args.paths, (6.0, 0.01), seed=0)
    print(f"d_statistic_batch, {args.paths} paths of {paths.shape[1]} points")
    t = {k: bench(k, lambda b=b: b.d_statistic_batch(paths, 0.01),
                  args.repeat) for k, b in backends.items()}
    d1, _ = backends["cython"].d_statistic_batch(paths, 0.01)
    d2, _ = backends["python"].d_statistic_batch(paths, 0.01)
    assert np.allclose(d1, d2, rtol=1e-12, atol=1e-14)
    print(f"  speedup    {t['python'] / t['cython']:10.1f}x")


if __name__ == "__main__":
    main()
