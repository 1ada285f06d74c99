"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Each row times one kernel on both backends and checks that they agree.
"""

import argparse
import time

import numpy as np

from infolag import _backend, _pykernels
from infolag.nullmodels import chunk_permutations

try:
    from infolag import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def cases(rng):
    q = 4
    a = rng.integers(0, q, (3000, 98))
    yield "pair_counts 98x98, T=3000", lambda k: _backend.pair_counts(a, a, q, kernels=k)

    a10 = rng.integers(0, q, (1500, 10))
    b10 = rng.integers(0, q, (1500, 10))
    j_obs = _backend.clogc_table(1500)[_backend.pair_counts(a10, b10, q)].sum(axis=(2, 3))
    perms = np.vstack([chunk_permutations(1, c, 1500) for c in range(16)])
    yield ("joint_exceedances 10x10, T=1500, 1024 shuffles",
           lambda k: _backend.joint_exceedances(a10, b10, q, perms, j_obs, 1e-9, kernels=k))

    s = rng.integers(0, 4, 50_000)
    yield "lz76_complexity n=50000", lambda k: _backend.lz76_complexity(s, kernels=k)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the fallback can be timed")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<50} {'python (s)':>11} {'cython (s)':>11} {'speedup':>8}")
    for name, fn in cases(rng):
        t_py, out_py = best_of(lambda: fn(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:<50} {t_py:>11.4f} {'-':>11} {'-':>8}")
            continue
        t_cy, out_cy = best_of(lambda: fn(_ckernels), args.repeat)
        if not np.array_equal(out_py, out_cy):
            raise SystemExit(f"backends disagree on {name}")
        print(f"{name:<50} {t_py:>11.4f} {t_cy:>11.4f} {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
