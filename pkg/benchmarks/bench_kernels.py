"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]

First-call JIT compilation is excluded: each numba kernel is warmed up once
before timing.
"""

import argparse
import timeit

import numpy as np

from gibbsform import kernels
from gibbsform._accel import HAVE_NUMBA


def cases(size: int, rng):
    n = 10
    terms = rng.normal(size=(size, n))
    masks = np.arange(1 << n, dtype=np.int64)
    xs = rng.normal(size=(size * 10, n))
    ps = rng.normal(size=(size * 10, n))
    a = rng.normal(size=(size * 10, 2 * n))
    b = rng.normal(size=(size * 10, 2 * n))
    return {
        "subset_sums": (kernels._subset_sums_numpy, kernels.subset_sums_nb, (terms, masks)),
        "polyline_work": (kernels._polyline_work_numpy, kernels.polyline_work_nb, (xs, ps)),
        "max_abs_pairing": (kernels._max_abs_pairing_numpy, kernels.max_abs_pairing_nb, (a, b)),
    }


def best_of(fn, args, repeat: int) -> float:
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<16} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}")
    for name, (np_fn, nb_fn, data) in cases(args.size, rng).items():
        t_np = best_of(np_fn, data, args.repeat)
        if HAVE_NUMBA:
            ref = np_fn(*data)
            got = nb_fn(*data)
            np.testing.assert_allclose(np.asarray(got[0] if isinstance(got, tuple) else got),
                                       np.asarray(ref[0] if isinstance(ref, tuple) else ref), rtol=1e-12)
            t_nb = best_of(nb_fn, data, args.repeat)
            print(f"{name:<16} {t_np * 1e3:11.3f} {t_nb * 1e3:11.3f} {t_np / t_nb:8.1f}x")
        else:
            print(f"{name:<16} {t_np * 1e3:11.3f} {'n/a':>11} {'':>8}")


if __name__ == "__main__":
    main()
