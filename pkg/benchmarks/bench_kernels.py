"""Time the numba kernels against their pure-numpy twins.

    python3 benchmarks/bench_kernels.py [--n 50001] [--repeat 5]

The first numba call of each kernel (JIT compile or cache load) is done
before timing. Outputs of the two backends are compared as a sanity check.
"""

import argparse
import timeit

import numpy as np

from gronwall_bounds._kernels import NUMBA_KERNELS, NUMPY_KERNELS


def cases(n, rng):
    h = 1.0 / (n - 1)
    t = np.linspace(0.0, 1.0, n)
    tm = t[:-1] + 0.5 * h
    y = np.exp(t) * np.cos(7 * t)
    W = np.cumsum(np.abs(np.sin(3 * t))) * h
    s = 1.0 + t * t
    zero_n, zero_m = np.zeros(n), np.zeros(n - 1)
    d = 3
    An = rng.uniform(-1, 1, (n, d, d))
    Am = rng.uniform(-1, 1, (n - 1, d, d))
    gn = rng.uniform(-1, 1, (n, d))
    gm = rng.uniform(-1, 1, (n - 1, d))
    Y0 = np.ones(d)
    M = rng.uniform(-1, 1, (min(n, 20000), 4, 4))
    return {
        "cumtrapz": lambda k: k.cumtrapz(y, h),
        "weighted_tail": lambda k: k.weighted_tail(W, s, h),
        "rk4_quadratic": lambda k: k.rk4_quadratic(
            zero_n + 0.5, zero_m + 0.5, -np.sin(t), -np.sin(tm), zero_n - 1, zero_m - 1, 0.2, h, 1e12
        )[0],
        "rk4_linear": lambda k: k.rk4_linear(An, Am, gn, gm, Y0, h),
        "power_norms": lambda k: k.power_norms(M, 200, 1e-10)[0],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=50_001, help="grid nodes")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if NUMBA_KERNELS is None:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<15}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max |diff|':>13}")
    for name, call in cases(args.n, rng).items():
        ref = call(NUMPY_KERNELS)
        got = call(NUMBA_KERNELS)  # warm-up
        diff = float(np.nanmax(np.abs(np.asarray(ref) - np.asarray(got))))
        t_np = min(timeit.repeat(lambda: call(NUMPY_KERNELS), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: call(NUMBA_KERNELS), number=1, repeat=args.repeat))
        print(f"{name:<15}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
