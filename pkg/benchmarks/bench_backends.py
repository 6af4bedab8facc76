"""Benchmark the numba kernels against the pure-numpy fallback.

Times the point-vortex RK4 inner loop and the minimal-image grid reductions,
which are the hot non-FFT paths. The field solver itself is FFT-bound and
identical under both backends; one n=512 step is timed for context.

Run:  python benchmarks/bench_backends.py [--grid-n 512] [--repeats 5]
"""

import argparse
import time

import numpy as np

from vortexlab import accel
from vortexlab.fields import make_grid
from vortexlab.initial_data import gaussian_component
from vortexlab.solver import ComponentSet, SolverParams, cfl_dt, step


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def numba_kernels():
    if accel.USING_NUMBA:
        return {
            "pv_rk4_steps": accel.pv_rk4_steps_kernel,
            "minimal_image_moments": accel.minimal_image_moments,
            "abs_first_moment": accel.abs_first_moment,
            "outer_sum": accel.outer_sum,
        }
    try:
        return accel._build_numba_kernels()
    except ImportError:
        return None


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid-n", type=int, default=512)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    nb = numba_kernels()
    np_k = accel.NUMPY_KERNELS
    rng = np.random.default_rng(0)

    print(f"selected backend: {accel.BACKEND}")
    if nb is None:
        print("numba unavailable; timing the numpy path only")

    rows = []

    # point-vortex RK4 inner loop: 4 vortices, 20k steps (one rotation period
    # of the reference pair at dt=1e-3 is ~20k steps)
    positions = rng.normal(size=(4, 2)) * 2.0
    strengths = rng.normal(size=4) + 0.5
    n_steps = 20_000

    def run_pv(kernel):
        pos = positions.copy()
        kernel(pos, strengths, 1e-3, n_steps, 0.0)

    if nb is not None:
        run_pv(nb["pv_rk4_steps"])  # compile before timing
        t_nb = best_of(lambda: run_pv(nb["pv_rk4_steps"]), args.repeats)
    else:
        t_nb = None
    t_np = best_of(lambda: run_pv(np_k["pv_rk4_steps"]), max(1, args.repeats // 2))
    rows.append(("pv_rk4_steps (N=4, 20k steps)", t_nb, t_np))

    # grid moment reductions at production resolution
    n = args.grid_n
    grid = make_grid(10.0, n)
    f = gaussian_component((4.5, 5.0), 0.4, 1.0, grid)
    margs = (f.values, grid.h, grid.L, 4.5, 5.0)

    for name, extra in (
        ("minimal_image_moments", ()),
        ("abs_first_moment", ()),
        ("outer_sum", (0.5,)),
    ):
        if nb is not None:
            nb[name](*margs, *extra)
            t_nb = best_of(lambda: nb[name](*margs, *extra), args.repeats)
        else:
            t_nb = None
        t_np = best_of(lambda: np_k[name](*margs, *extra), args.repeats)
        rows.append((f"{name} ({n}x{n})", t_nb, t_np))

    print(f"\n{'kernel':42s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, t_nb, t_np in rows:
        nb_s = f"{t_nb * 1e3:9.2f}ms" if t_nb is not None else "      n/a"
        ratio = f"{t_np / t_nb:7.1f}x" if t_nb else "     n/a"
        print(f"{name:42s} {nb_s:>10s} {t_np * 1e3:9.2f}ms {ratio:>8s}")

    # context: one solver step at the same resolution (FFT-bound, backend
    # independent)
    state = ComponentSet(grid, f.values[None], [1.0])
    params = SolverParams(nu=1e-3)
    dt = 0.5 * cfl_dt(state, params)
    step(state, params, dt)
    t_step = best_of(lambda: step(state, params, dt), max(2, args.repeats // 2))
    print(f"\nfield solver step at n={n} (FFT-bound, backend independent): "
          f"{t_step * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
