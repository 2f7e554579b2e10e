"""Timing comparison of the compiled kernels against their fallback paths.

Run under both backends:

    python benchmarks/bench_backends.py
    QCPON_BACKEND=numpy python benchmarks/bench_backends.py

Covers the two hot paths: the seven-band enumeration (compiled loop vs the
vectorized numpy search) and the finite-key rate evaluation (compiled vs
interpreted scalar chain).
"""

import argparse
import time

import numpy as np

from qcpon import build_crosstalk_matrix, build_grid, default_spectrum_path, load_spectrum_file
from qcpon._accel import BACKEND, USE_NUMBA
from qcpon._kernels import finite_key_rate, seven_band_search
from qcpon.assignment import _seven_band_search_numpy, _summed_area_table


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_seven_band(users: int) -> None:
    grid = build_grid(1530.0, 1564.4, 0.8)
    matrix = build_crosstalk_matrix(grid, load_spectrum_file(default_spectrum_path()))
    sat = _summed_area_table(matrix.u)
    d = grid.count

    t_np = time_call(_seven_band_search_numpy, sat, d, users, users)
    line = f"seven-band search P={users:2d} ({5*(users+1)**2*(users+2)**2//4} layouts):"
    print(f"{line}\n    numpy-vectorized {t_np*1e3:9.2f} ms")
    if USE_NUMBA:
        seven_band_search(sat, d, users, users)  # compile
        t_nb = time_call(seven_band_search, sat, d, users, users)
        print(f"    numba            {t_nb*1e3:9.2f} ms   ({t_np/t_nb:5.1f}x)")


def bench_rate_eval(n_evals: int) -> None:
    args = (3.7e-3, 8e-5, 0.033, 1.22, 1e-10, 1e11)
    nus = np.linspace(0.02, 0.3, n_evals)

    def run(fn):
        acc = 0.0
        for nu in nus:
            acc += fn(*args, 0.4, nu, 0.78, 0.14, 0.5)
        return acc

    print(f"finite-key rate evaluation ({n_evals} points):")
    if USE_NUMBA:
        run(finite_key_rate)  # compile
        t = time_call(run, finite_key_rate, repeat=3)
        print(f"    numba            {t/n_evals*1e6:9.2f} us/eval")
        print("    (re-run with QCPON_BACKEND=numpy for the interpreted number)")
    else:
        t = time_call(run, finite_key_rate, repeat=1)
        print(f"    pure python      {t/n_evals*1e6:9.2f} us/eval")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--users", type=int, default=20)
    parser.add_argument("--evals", type=int, default=2000)
    args = parser.parse_args()
    print(f"backend: {BACKEND}\n")
    bench_seven_band(args.users)
    print()
    bench_rate_eval(args.evals)


if __name__ == "__main__":
    main()
