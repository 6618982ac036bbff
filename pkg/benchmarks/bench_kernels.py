"""Compare the compiled and numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--N 128 256] [--repeat 50]

Reports the median time per call of each hot kernel and of a full ETD3
step, and the largest difference between the two backends' outputs.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from nssetd.kernels import backend_module
from nssetd.model import ModelParams
from nssetd.spectral import make_grid


def _time(fn, repeat):
    fn()
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def _cases(N, rng):
    grid = make_grid(N, 1.0)
    shape, sshape = grid.shape, grid.spectral_shape
    gx, gy = rng.standard_normal(shape), rng.standard_normal(shape)
    c = lambda: rng.standard_normal(sshape) + 1j * rng.standard_normal(sshape)  # noqa: E731
    r = lambda: rng.random(sshape)  # noqa: E731
    u, n0, n1, n2, bx, by = c(), c(), c(), c(), c(), c()
    e, p0, p1, p2, reg = r(), r(), r(), r(), r()
    denom = 1.0 + reg
    kx, ky = grid.kx.ravel().copy(), grid.ky.ravel().copy()

    def run(mod, name):
        if name == "beta_flux":
            ox, oy = np.empty(shape), np.empty(shape)
            return lambda: mod.beta_flux(gx, gy, 0.25, ox, oy), lambda: ox.copy()
        if name == "assemble_f_hat":
            out = np.empty(sshape, complex)
            return lambda: mod.assemble_f_hat(bx, by, u, kx, ky, grid.lam, 0.25, out), lambda: out.copy()
        out = np.empty(sshape, complex)
        return lambda: mod.etd3_combine(u, n0, n1, n2, e, p0, p1, p2, reg, denom, 0.01, out), lambda: out.copy()

    return run


def _step_time(backend, N, repeat):
    from nssetd import kernels, schemes

    saved = {k: getattr(kernels, k) for k in ("beta_flux", "log_sum", "assemble_f_hat", "etd3_combine")}
    mod = backend_module(backend)
    for k in saved:
        setattr(kernels, k, getattr(mod, k))
    try:
        grid = make_grid(N, 1.0)
        u0 = 0.05 * np.random.default_rng(0).standard_normal(grid.shape)
        s = schemes.init_state(grid, u0, 0.01, ModelParams(eps=0.05, kappa=0.25, A=1.0))
        return _time(lambda: schemes.etd3_step(s), repeat)
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, nargs="+", default=[128, 256])
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args(argv)

    try:
        compiled = backend_module("cython")
    except ImportError:
        print("compiled backend not built; only the numpy backend is available")
        return 1
    python = backend_module("python")
    rng = np.random.default_rng(0)

    print(f"{'kernel':<16} {'N':>5} {'numpy [us]':>12} {'cython [us]':>12} {'speedup':>8} {'max diff':>10}")
    for N in args.N:
        run = _cases(N, rng)
        for name in ("beta_flux", "assemble_f_hat", "etd3_combine"):
            fp, gp = run(python, name)
            fc, gc = run(compiled, name)
            tp, tc = _time(fp, args.repeat), _time(fc, args.repeat)
            diff = float(np.max(np.abs(gp() - gc())))
            print(f"{name:<16} {N:>5} {tp * 1e6:12.1f} {tc * 1e6:12.1f} {tp / tc:8.2f} {diff:10.2e}")
        tp, tc = _step_time("python", N, args.repeat), _step_time("cython", N, args.repeat)
        print(f"{'etd3 step':<16} {N:>5} {tp * 1e6:12.1f} {tc * 1e6:12.1f} {tp / tc:8.2f} {'':>10}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
