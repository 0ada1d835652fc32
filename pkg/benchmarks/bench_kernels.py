"""Time the compiled loop kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Each row reports the best wall time of ``--repeat`` calls after one
warm-up call (which also triggers numba compilation).
"""
import argparse
import timeit

import numpy as np

from climarisk import _jit, kernels


def cases(scale, rng):
    n = max(10, int(2000 * scale))
    m = max(5, int(200 * scale))
    x = rng.normal(size=(n, 4))
    centers = rng.normal(size=(8, 4))
    pool = rng.normal(size=(m, 4))
    panel = rng.random((max(10, int(500 * scale)), 12))
    ns = max(20, int(300 * scale))
    xs = rng.normal(size=(ns, 5))
    ys = np.where(xs[:, 0] + 0.5 * rng.normal(size=ns) > 0, 1.0, -1.0)
    gram = xs @ xs.T
    return [
        ("sq_distances", (x, pool)),
        ("assign_nearest", (x, centers)),
        ("knn_indices", (pool, pool, 5, True)),
        ("interaction", (panel, 1e-9)),
        ("smo_solve", (gram, ys, 1.0, 1e-6, 10 * ns * ns)),
    ]


def best_time(fn, args, repeat):
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _jit.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<16}{'numba [ms]':>12}{'numpy [ms]':>12}{'speed-up':>10}")
    for name, call_args in cases(args.scale, rng):
        t_np = best_time(getattr(kernels, f"{name}_np"), call_args, args.repeat)
        if _jit.HAVE_NUMBA:
            t_jit = best_time(getattr(kernels, f"{name}_loop"), call_args, args.repeat)
            print(f"{name:<16}{1e3 * t_jit:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_jit:>9.1f}x")
        else:
            print(f"{name:<16}{'-':>12}{1e3 * t_np:>12.3f}{'-':>10}")


if __name__ == "__main__":
    main()
