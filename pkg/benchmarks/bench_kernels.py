"""Timing comparison of the compiled kernel layer against the plain-Python
fallback.

Run as `python3 benchmarks/bench_kernels.py`.  With DEFECTLAB_NO_NUMBA set the
compiled column is unavailable and only the fallback is timed.
"""

import argparse
import time

import numpy as np

from defectlab import kernels


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(scale):
    omega = np.linspace(-30.0, 30.0, int(200_000 * scale))
    nodes, weights = kernels.half_line_grid(cutoff=100.0, panel=1.0, order=32)
    values = kernels.a_hat(np.abs(nodes), 2)
    lams = np.linspace(-5.0, 5.0, int(200 * scale))
    u = np.linspace(0.0, 80.0, int(200_000 * scale))
    return [
        ("sigma0_hat", kernels.sigma0_hat, (omega, 3, 1)),
        ("big_r_hat", kernels.big_r_hat, (omega, 4, 2, 3)),
        ("r_hat", kernels.r_hat, (omega, 3, 2)),
        ("amplitude_minus_integrand", kernels.amplitude_minus_integrand, (u, 1.3, 3)),
        ("fourier_cos_sum", kernels.fourier_cos_sum, (nodes, weights, values, lams)),
        ("fourier_exp_sum", kernels.fourier_exp_sum, (nodes, weights, values, lams)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument(
        "--scale", type=float, default=1.0, help="problem size multiplier"
    )
    args = parser.parse_args()

    print(f"numba layer active: {kernels.USE_NUMBA}")
    header = f"{'kernel':<28} {'compiled ms':>12} {'plain ms':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, fn, fn_args in cases(args.scale):
        if kernels.USE_NUMBA:
            fn(*fn_args)  # compile outside the timed region
            jit_t = best_of(lambda: fn(*fn_args), args.repeats)
            plain_t = best_of(lambda: fn.py_func(*fn_args), args.repeats)
            ratio = plain_t / jit_t if jit_t > 0 else float("inf")
            print(
                f"{name:<28} {jit_t * 1e3:>12.3f} {plain_t * 1e3:>12.3f} {ratio:>8.1f}x"
            )
        else:
            plain_t = best_of(lambda: fn(*fn_args), args.repeats)
            print(f"{name:<28} {'-':>12} {plain_t * 1e3:>12.3f} {'-':>9}")


if __name__ == "__main__":
    main()
