"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Times the hot kernels (padded-array stencils, MUSCL face fluxes and the
deterministic pairwise reduction) on a few grid sizes and checks that the
two backends agree bitwise on every output.

Usage: python benchmarks/bench_kernels.py [--sizes 64,128,256] [--repeat 20]
"""

import argparse
import time

import numpy as np

from oldb2d.kernels import pure

try:
    from oldb2d.kernels import _core as compiled
except ImportError:
    compiled = None


def _time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n, rng):
    pad = rng.standard_normal((n + 2, n + 2))
    padw = rng.standard_normal((n + 4, n))
    padh = rng.standard_normal((n, n + 4))
    uf = rng.standard_normal((n + 1, n))
    vf = rng.standard_normal((n, n + 1))
    flat = rng.standard_normal(n * n)
    dx = 1.0 / n
    return [
        ("laplacian", (pad, dx, dx)),
        ("ddx", (pad, dx)),
        ("ddy", (pad, dx)),
        ("muscl_div_x", (padw, uf, dx)),
        ("muscl_div_y", (padh, vf, dx)),
        ("pairwise_sum", (flat,)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,128,256")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if compiled is None:
        print("compiled backend unavailable; timing the pure backend only")
    rng = np.random.default_rng(0)
    header = f"{'kernel':<14}{'n':>6}{'pure [us]':>12}"
    if compiled is not None:
        header += f"{'compiled [us]':>15}{'speedup':>9}{'bitwise':>9}"
    print(header)
    for n in sizes:
        for name, call_args in _cases(n, rng):
            t_pure = _time(getattr(pure, name), call_args, args.repeat)
            line = f"{name:<14}{n:>6}{t_pure * 1e6:>12.1f}"
            if compiled is not None:
                t_comp = _time(getattr(compiled, name), call_args, args.repeat)
                a = getattr(pure, name)(*call_args)
                b = getattr(compiled, name)(*call_args)
                same = np.array_equal(np.asarray(a), np.asarray(b))
                line += (f"{t_comp * 1e6:>15.1f}{t_pure / t_comp:>9.2f}"
                         f"{'yes' if same else 'NO':>9}")
            print(line)


if __name__ == "__main__":
    main()
