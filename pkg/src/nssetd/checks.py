"""Property suites shared by the ``check`` subcommand and the acceptance tests.

Each suite returns a list of :class:`CheckResult`; a suite passes when all
of its results do.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .etdphi import C_RATIO, build_tables, check_operator_bounds, eval_g
from .model import (
    ModelParams,
    beta,
    convexity_check,
    energy,
    modified_energy,
    stability_constants,
)
from .schemes import etd1_step, etd3_step, init_state
from .spectral import SpectralGrid, make_grid


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def smooth_random_field(grid: SpectralGrid, rng, amplitude: float = 1.0, decay: float = 4.0) -> np.ndarray:
    """Mean-zero field with spectrum decaying like ``(1 + |k|^2)^(-decay/2)``."""
    noise = rng.standard_normal(grid.shape)
    F = grid.transform(noise)
    kk = grid.lam * (grid.L / (2 * np.pi)) ** 2
    F *= (1.0 + kk) ** (-decay / 2)
    F[0, 0] = 0.0
    u = grid.inverse_transform(F)
    return amplitude * u / max(np.max(np.abs(u)), 1e-300)


# -- operators ------------------------------------------------------------------------------


def phi_monotonicity(n: int = 10_000, x_max: float = 100.0, tol: float = 1e-14) -> CheckResult:
    x = np.concatenate([[0.0], np.logspace(-8, math.log10(x_max), n - 1)])
    worst = -math.inf
    for g in eval_g(x):
        worst = max(worst, float(np.max(np.diff(g))))
    return CheckResult("phi functions decreasing", worst <= tol, f"max increase {worst:.3e} (tol {tol:g})")


def phi_ratio_bounds(n: int = 10_000, x_max: float = 100.0, slack: float = 1e-12) -> CheckResult:
    x = np.concatenate([[0.0], np.logspace(-8, math.log10(x_max), n - 1)])
    g0, g1, g2 = eval_g(x)
    worst = float(max(np.max(g1 / g0), np.max(g2 / g0)))
    ok = worst <= C_RATIO * (1 + slack)
    return CheckResult("phi ratio bounds", ok, f"max g_i/g_0 = {worst:.15f} <= {C_RATIO:.15f}")


def operator_inequalities(
    sizes=(16, 32, 33), fields: int = 100, seed: int = 1, slack: float = 1e-12
) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for N in sizes:
        grid = make_grid(N, 1.0)
        failures = 0
        first = None
        for _ in range(fields):
            eps = float(rng.uniform(0.02, 0.5))
            kappa = float(rng.uniform(0.0, 1.0))
            dt = float(10.0 ** rng.uniform(-4, 1))
            tables = build_tables(grid, eps, kappa, 0.0, dt)
            f = smooth_random_field(grid, rng, decay=float(rng.uniform(0.0, 4.0)))
            rep = check_operator_bounds(grid, tables, f, slack=slack)
            if not rep.ok:
                failures += 1
                first = first or rep.violations
        detail = f"{fields} fields, {failures} failing" + (f"; first {first}" if first else "")
        out.append(CheckResult(f"operator inequalities N={N}", failures == 0, detail))
    return out


def flux_contraction(pairs: int = 100_000, seed: int = 2, slack: float = 0.0) -> CheckResult:
    rng = np.random.default_rng(seed)
    # mix scales so both the linear regime near 0 and the saturated tail are hit
    scale = 10.0 ** rng.uniform(-6, 3, size=(pairs, 1))
    v = rng.standard_normal((pairs, 2)) * scale
    w = v + rng.standard_normal((pairs, 2)) * scale * 10.0 ** rng.uniform(-8, 0, size=(pairs, 1))
    bvx, bvy = beta(v[:, 0], v[:, 1])
    bwx, bwy = beta(w[:, 0], w[:, 1])
    lhs = np.hypot(bvx - bwx, bvy - bwy)
    rhs = np.hypot(v[:, 0] - w[:, 0], v[:, 1] - w[:, 1])
    bad = int(np.count_nonzero(lhs > rhs * (1 + slack)))
    ratio = float(np.max(lhs / np.where(rhs > 0, rhs, 1.0)))
    return CheckResult("flux contraction", bad == 0, f"{pairs} pairs, {bad} violations, max ratio {ratio:.17g}")


def hessian_signs(kappas=(0.05, 0.125, 0.5)) -> list[CheckResult]:
    out = []
    for k0 in kappas:
        rep = convexity_check(k0)
        expected = k0 >= 0.125
        out.append(
            CheckResult(
                f"Hessian sign pattern kappa0={k0}",
                rep.convex == expected,
                f"min eigenvalue {rep.min_eigenvalue:.3e} at {rep.argmin}; convex={rep.convex}, expected {expected}",
            )
        )
    return out


def suite_operators() -> list[CheckResult]:
    return [
        phi_monotonicity(),
        phi_ratio_bounds(),
        *operator_inequalities(),
        flux_contraction(),
        *hessian_signs(),
    ]


def suite_convexity() -> list[CheckResult]:
    return hessian_signs()


# -- stability ------------------------------------------------------------------------------


def modified_energy_run(dt: float, steps: int = 2000, N: int = 32, eps: float = 0.1, kappa: float = 0.25,
                        seed: int = 3, amplitude: float = 0.5):
    """ETD3 with ``A = A_min``: per-step increase of the modified energy and
    the largest excess of ``E_N(u^k)`` over the initial modified energy."""
    grid = make_grid(N, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sc = stability_constants(ModelParams(eps=eps, kappa=kappa))
    p = ModelParams(eps=eps, kappa=kappa, A=sc.A_min)
    u0 = smooth_random_field(grid, np.random.default_rng(seed), amplitude=amplitude)
    s = init_state(grid, u0, dt, p)
    prev = modified_energy(s.u[0], s.u[1], s.u[2], sc, p, grid)
    initial = prev
    worst_rise = -math.inf
    worst_excess = -math.inf
    for _ in range(steps):
        s = etd3_step(s)
        cur = modified_energy(s.u[0], s.u[1], s.u[2], sc, p, grid)
        worst_rise = max(worst_rise, cur - prev)
        worst_excess = max(worst_excess, energy(s.u[0], p, grid) - initial)
        prev = cur
    return worst_rise, worst_excess


def etd1_dissipation_run(dt: float, steps: int = 2000, N: int = 32, eps: float = 0.1, kappa: float = 0.125,
                         seed: int = 3, amplitude: float = 0.5) -> float:
    grid = make_grid(N, 1.0)
    p = ModelParams(eps=eps, kappa=kappa, A=0.0)
    u0 = smooth_random_field(grid, np.random.default_rng(seed), amplitude=amplitude)
    s = init_state(grid, u0, dt, p)
    prev = energy(s.u[0], p, grid)
    worst = -math.inf
    for _ in range(steps):
        s = etd1_step(s)
        cur = energy(s.u[0], p, grid)
        worst = max(worst, cur - prev)
        prev = cur
    return worst


def energy_stability_results(dts=(0.01, 0.1, 1.0), steps: int = 2000, tol: float = 1e-10) -> list[CheckResult]:
    out = []
    for dt in dts:
        rise, excess = modified_energy_run(dt, steps)
        out.append(CheckResult(f"modified energy nonincreasing dt={dt}", rise <= tol, f"max rise {rise:.3e}"))
        out.append(CheckResult(f"energy bounded by initial modified energy dt={dt}", excess <= tol,
                               f"max excess {excess:.3e}"))
    return out


def etd1_dissipation_results(dts=(0.01, 0.1, 1.0), steps: int = 2000, tol: float = 1e-10) -> list[CheckResult]:
    out = []
    for dt in dts:
        rise = etd1_dissipation_run(dt, steps)
        out.append(CheckResult(f"ETD1 energy dissipation dt={dt}", rise <= tol, f"max rise {rise:.3e}"))
    return out


def suite_stability() -> list[CheckResult]:
    return energy_stability_results() + etd1_dissipation_results()


SUITES = {
    "operators": suite_operators,
    "stability": suite_stability,
    "convexity": suite_convexity,
}
