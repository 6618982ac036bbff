"""ETD weight functions and per-mode multiplier tables.

The three weights of the multistep schemes are

    g0(x) = (1 - e^-x) / x
    g1(x) = (x - 1 + e^-x) / x^2
    g2(x) = (x^2 - 2x + 2 - 2 e^-x) / x^3

evaluated at ``x = dt * Lambda_{k,l}`` for every Fourier mode.  The closed
forms cancel catastrophically for small ``x`` (the ``g2`` numerator is
``~x^3/3`` built from O(1) terms), so below ``SERIES_CUTOFF`` a Taylor
expansion is used instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .spectral import SpectralGrid

SERIES_CUTOFF = 1.0
SERIES_TERMS = 24
EXP_UNDERFLOW = 700.0

# Taylor coefficients: g_j(x) = c_j sum_n (-x)^n / (n + j + 1)!,  c = (1, 1, 2)
_COEFFS = [
    np.array([c * (-1.0) ** n / factorial(n + j + 1) for n in range(SERIES_TERMS)])
    for j, c in enumerate((1.0, 1.0, 2.0))
]

C_RATIO = 1.0 / (1.0 - np.exp(-2.0))
"""Uniform bound on ``g1/g0`` and ``g2/g0``; also the constants C4 = C5."""


def _horner(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.full_like(x, coeffs[-1])
    for c in coeffs[-2::-1]:
        out = out * x + c
    return out


def eval_g(x):
    """Return ``(g0, g1, g2)`` at ``x >= 0`` (scalar or array).

    Relative accuracy is a few ulps over ``[0, 700]``; beyond that ``e^-x``
    is dropped.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("eval_g needs finite arguments")
    if np.any(xa < 0):
        raise ValueError("eval_g is defined for x >= 0 only")

    small = xa <= SERIES_CUTOFF
    big = ~small
    g0 = np.empty_like(xa)
    g1 = np.empty_like(xa)
    g2 = np.empty_like(xa)

    xs = xa[small]
    g0[small] = _horner(_COEFFS[0], xs)
    g1[small] = _horner(_COEFFS[1], xs)
    g2[small] = _horner(_COEFFS[2], xs)

    xb = xa[big]
    em = np.where(xb > EXP_UNDERFLOW, 0.0, np.exp(-np.minimum(xb, EXP_UNDERFLOW)))
    one_minus = -np.expm1(-np.minimum(xb, EXP_UNDERFLOW))
    one_minus = np.where(xb > EXP_UNDERFLOW, 1.0, one_minus)
    g0[big] = one_minus / xb
    g1[big] = ((xb - 1.0) + em) / xb**2
    g2[big] = ((xb * xb - 2.0 * xb + 2.0) - 2.0 * em) / xb**3

    if xa.ndim == 0:
        return float(g0), float(g1), float(g2)
    return g0, g1, g2


@dataclass(frozen=True, eq=False)
class PhiTables:
    """Per-mode multipliers for one ``(grid, eps, kappa, A, dt)`` tuple.

    All tables live in the grid's half-spectrum layout.  ``reg`` is
    ``A dt^3 phi0 lambda^2``, the regularization weight; the implicit
    regularized update divides by ``reg_denom = 1 + reg``.
    """

    grid: SpectralGrid
    eps: float
    kappa: float
    A: float
    dt: float
    Lambda: np.ndarray
    exp_neg: np.ndarray
    phi0: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    calG: np.ndarray
    calG_half: np.ndarray
    reg: np.ndarray
    reg_denom: np.ndarray


def eigenvalues(grid: SpectralGrid, eps: float, kappa: float) -> np.ndarray:
    """``Lambda = eps^2 lambda^2 + kappa lambda``, the symbol of ``L_N``."""
    lam = grid.lam
    return eps**2 * lam**2 + kappa * lam


@lru_cache(maxsize=32)
def build_tables(grid: SpectralGrid, eps: float, kappa: float, A: float, dt: float) -> PhiTables:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not kappa >= 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    if not A >= 0:
        raise ValueError(f"A must be nonnegative, got {A}")
    if not (dt > 0 and np.isfinite(dt)):
        raise ValueError(f"dt must be positive, got {dt}")

    Lam = eigenvalues(grid, eps, kappa)
    x = dt * Lam
    g0, g1, g2 = eval_g(x)
    exp_neg = np.where(x > EXP_UNDERFLOW, 0.0, np.exp(-np.minimum(x, EXP_UNDERFLOW)))
    calG = 1.0 / g0
    reg = A * dt**3 * g0 * grid.lam**2

    tables = dict(
        Lambda=Lam,
        exp_neg=exp_neg,
        phi0=g0,
        phi1=g1,
        phi2=g2,
        G1=g1 / g0,
        G2=g2 / g0,
        calG=calG,
        calG_half=np.sqrt(calG),
        reg=reg,
        reg_denom=1.0 + reg,
    )
    for arr in tables.values():
        arr.setflags(write=False)
    return PhiTables(grid=grid, eps=eps, kappa=kappa, A=A, dt=dt, **tables)


@dataclass
class BoundsReport:
    """Outcome of :func:`check_operator_bounds`; ``violations`` lists failures."""

    norm_f: float
    norm_G0f: float
    dt_Lff: float
    calG_ff: float
    L_negdelta_exp: float
    norm_G1f: float
    norm_G2f: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def check_operator_bounds(grid: SpectralGrid, tables: PhiTables, f: np.ndarray, slack: float = 1e-12) -> BoundsReport:
    """Evaluate the operator inequalities for a mean-zero grid function.

    Checks, with relative ``slack``:

    (i)   ||f|| <= ||calG^(1/2) f||
    (ii)  dt <L f, f> <= <calG f, f>
    (iii) <L f, -Delta e^{-dt L} f> >= 0
    (iv)  ||G1 f|| <= C ||f||,  ||G2 f|| <= C ||f||,  C = 1/(1 - e^-2)

    Each quantity is computed in physical space (operators applied then
    inverted back) so the check exercises transforms and tables together.
    """
    if abs(grid.mean(f)) > 1e-10 * (1.0 + np.max(np.abs(f))):
        raise ValueError("check_operator_bounds expects a mean-zero field")
    F = grid.transform(f)
    back = grid.inverse_transform

    nf = np.sqrt(grid.inner(f, f))
    G0f = back(tables.calG_half * F)
    nG0f = np.sqrt(grid.inner(G0f, G0f))
    Lf = back(tables.Lambda * F)
    dtLff = tables.dt * grid.inner(Lf, f)
    calGff = grid.inner(back(tables.calG * F), f)
    neg_lap_exp = back(grid.lam * tables.exp_neg * F)
    L_nde = grid.inner(Lf, neg_lap_exp)
    G1f = back(tables.G1 * F)
    G2f = back(tables.G2 * F)
    nG1 = np.sqrt(grid.inner(G1f, G1f))
    nG2 = np.sqrt(grid.inner(G2f, G2f))

    scale_sq = max(nf**2, 1e-300)
    violations = []

    def need(cond, label, **data):
        if not cond:
            violations.append(dict(check=label, **data))

    need(nf <= nG0f * (1 + slack) + 1e-300, "i", lhs=nf, rhs=nG0f)
    need(dtLff <= calGff + slack * max(abs(calGff), scale_sq), "ii", lhs=dtLff, rhs=calGff)
    need(L_nde >= -slack * max(abs(L_nde), np.sqrt(grid.inner(Lf, Lf)) * nf), "iii", value=L_nde)
    need(nG1 <= C_RATIO * nf * (1 + slack), "iv-G1", lhs=nG1, rhs=C_RATIO * nf)
    need(nG2 <= C_RATIO * nf * (1 + slack), "iv-G2", lhs=nG2, rhs=C_RATIO * nf)

    if violations:
        # attach the worst table entries so failures can be traced to a mode
        for v in violations:
            key = {"iv-G1": tables.G1, "iv-G2": tables.G2}.get(v["check"])
            if key is not None:
                idx = np.unravel_index(np.argmax(key), key.shape)
                v["mode"] = tuple(int(i) for i in idx)
                v["multiplier"] = float(key[idx])

    return BoundsReport(nf, nG0f, dtLff, calGff, L_nde, nG1, nG2, violations)
