#!/usr/bin/env python3
"""Benchmark the compiled stepping kernels against the pure-numpy fallback.

Runs the three hot loops (Crank-Nicolson stepping, the nonlinear split step,
and the batched linearized-flow chunk) at desk scale on both backends and
prints a timing table.  Run after `pip install -e . --no-build-isolation`:

    python3 benchmarks/bench_kernels.py [--points 8192] [--steps 2000]
"""
import argparse
import time

import numpy as np

from radnls import _stepkern_np as fallback
from radnls import kernels
from radnls.grid import GridSpec, sym_laplacian_tridiag


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=8192)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--batch", type=int, default=16)
    args = ap.parse_args()

    grid = GridSpec(4, 300.0, args.points)
    d, e = sym_laplacian_tridiag(grid)
    v = -5.0 * np.exp(-(grid.r / 1.5) ** 2)
    diag = d + v
    rng = np.random.default_rng(0)
    f = 0.2 * np.exp(-(grid.r / 2.0) ** 2) * (1 + 0.3j)
    phi = grid.sym * f
    lams, alphas = np.array([1.0]), np.array([1.2])
    mask = np.exp(-0.01 * np.clip((grid.r - 220) / 80, 0, None) ** 3)

    rows = []
    impls = [("compiled", kernels)] if kernels.BACKEND == "compiled" else []
    impls.append(("python", fallback))
    if kernels.BACKEND != "compiled":
        print("note: compiled backend unavailable; timing the fallback only")

    for label, impl in impls:
        fac = impl.make_cn_factor(diag, e, 0.01)
        rows.append((f"cn_steps x{args.steps}", label,
                     timeit(lambda: impl.cn_steps(fac, phi, args.steps))))
        rows.append((f"strang_steps x{args.steps}", label,
                     timeit(lambda: impl.strang_steps(fac, phi, grid.sym, lams,
                                                      alphas, mask, args.steps))))

    # batched linearized-flow chunk: compiled kernel vs numpy batch stepper
    from radnls.hamiltonian import solve_ground_eigenpair, PotentialSpec
    from radnls.manifold import continue_branch
    from radnls.nonlinearity import NonlinearitySpec
    from radnls.propagator import LinearizationPath, _BatchOmegaStepper

    sd = solve_ground_eigenpair(PotentialSpec("gaussian_well", 5.0, 1.5), grid)
    branch = continue_branch(sd, NonlinearitySpec(((1.0, 1.2),), 4),
                             a_max=0.5, steps=80)
    path = LinearizationPath(branch, "frozen", a0=0.3)
    batch = np.ascontiguousarray(
        np.stack([grid.sym * f * np.exp(0.1j * k) for k in range(args.batch)]))
    nsteps = max(1, args.steps // 10)
    stepper = _BatchOmegaStepper(path, 0.01)
    if stepper._compiled:
        rows.append((f"omega_chunk x{nsteps} (batch {args.batch})", "compiled",
                     timeit(lambda: stepper.run_chunk(batch.copy(), batch.copy(),
                                                      0.0, nsteps), repeat=1)))
    stepper._compiled = False
    rows.append((f"omega_chunk x{nsteps} (batch {args.batch})", "python",
                 timeit(lambda: stepper.run_chunk(batch.copy(), batch.copy(),
                                                  0.0, nsteps), repeat=1)))

    width = max(len(r[0]) for r in rows)
    print(f"\npoints={args.points}  backend available: {kernels.BACKEND}\n")
    print(f"{'kernel'.ljust(width)}  backend   seconds")
    baseline = {}
    for name, label, secs in rows:
        speed = ""
        if label == "compiled":
            baseline[name] = secs
        elif name in baseline:
            speed = f"  ({secs / baseline[name]:.2f}x the compiled time)"
        print(f"{name.ljust(width)}  {label:8s}  {secs:8.3f}{speed}")


if __name__ == "__main__":
    main()
