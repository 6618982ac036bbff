"""No-slope-selection thin-film physics on a collocation grid.

The equation is split as ``u_t = -L_N u - f_N(u)`` with

    L_N u = eps^2 Delta_N^2 u - kappa Delta_N u
    f_N(u) = div_N( grad_N u / (1 + |grad_N u|^2) ) + kappa Delta_N u

so that ``L_N`` carries all the stiffness and ``f_N`` is explicit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .etdphi import C_RATIO
from .spectral import SpectralGrid

KAPPA0 = 0.125


@dataclass(frozen=True)
class ModelParams:
    eps: float
    kappa: float = 0.25
    A: float = 0.0
    dealias: bool = False

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        if not self.A >= 0:
            raise ValueError(f"A must be nonnegative, got {self.A}")


@dataclass(frozen=True)
class StabilityConstants:
    kappa: float
    eps: float
    kappa0: float
    kappa_star: float
    C4: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma0: float
    alpha0: float
    A_min: float
    hypotheses_met: bool


@dataclass(frozen=True)
class Observables:
    t: float
    energy: float
    modified_energy: float
    roughness: float
    slope: float
    char_length: float  # nan when the slope vanishes
    mass_mean: float


# -- nonlinear term --------------------------------------------------------------


@lru_cache(maxsize=8)
def _padded_grid(grid: SpectralGrid) -> SpectralGrid:
    M = (3 * grid.N + 1) // 2
    return SpectralGrid(M, grid.L, grid.workers)


def flux_hat(grid: SpectralGrid, u_hat: np.ndarray, dealias: bool = False):
    """Spectral coefficients of ``beta(grad_N u) = grad u / (1 + |grad u|^2)``."""
    if dealias:
        fine = _padded_grid(grid)
        gx, gy = fine.grad_hat(grid.resample_hat(u_hat, fine.N))
        bx = np.empty_like(gx)
        by = np.empty_like(gy)
        kernels.beta_flux(gx, gy, 0.0, bx, by)
        return (
            fine.resample_hat(fine.transform(bx), grid.N),
            fine.resample_hat(fine.transform(by), grid.N),
        )
    gx, gy = grid.grad_hat(u_hat)
    bx = np.empty_like(gx)
    by = np.empty_like(gy)
    kernels.beta_flux(gx, gy, 0.0, bx, by)
    return grid.transform(bx), grid.transform(by)


def nonlinear_hat(grid: SpectralGrid, u_hat: np.ndarray, p: ModelParams) -> np.ndarray:
    """``f_N(u)`` in spectral space from ``u_hat``; the hot path of every step."""
    bx_hat, by_hat = flux_hat(grid, u_hat, p.dealias)
    out = np.empty_like(u_hat)
    kernels.assemble_f_hat(
        bx_hat, by_hat, u_hat, grid.kx.ravel(), grid.ky.ravel(), grid.lam, p.kappa, out
    )
    return out


def nonlinear_f(u: np.ndarray, p: ModelParams, grid: SpectralGrid) -> np.ndarray:
    return grid.inverse_transform(nonlinear_hat(grid, grid.transform(u), p))


def beta(vx, vy):
    """The flux map ``v -> v / (1 + |v|^2)`` on arrays of vector components."""
    d = 1.0 + (vx * vx + vy * vy)
    return vx / d, vy / d


def g_vector(u: np.ndarray, p: ModelParams, grid: SpectralGrid):
    """``beta(grad_N u) + kappa grad_N u``; its divergence is ``f_N(u)``."""
    gx, gy = grid.grad(u)
    bx = np.empty_like(gx)
    by = np.empty_like(gy)
    kernels.beta_flux(gx, gy, p.kappa, bx, by)
    return bx, by


# -- energies ----------------------------------------------------------------------


def energy_hat(grid: SpectralGrid, u_hat: np.ndarray, eps: float) -> float:
    gx, gy = grid.grad_hat(u_hat)
    log_part = -0.5 * grid.h**2 * kernels.log_sum(gx, gy)
    return log_part + 0.5 * eps**2 * grid.spectral_sum(u_hat, grid.lam**2)


def energy(u: np.ndarray, p: ModelParams, grid: SpectralGrid) -> float:
    """Discrete energy ``h^2 sum(-1/2 ln(1 + |grad_N u|^2)) + eps^2/2 ||Delta_N u||^2``."""
    return energy_hat(grid, grid.transform(u), p.eps)


def grad_norm_sq(grid: SpectralGrid, f: np.ndarray) -> float:
    """``||grad_N f||^2`` via Parseval, ``L^2 sum lambda |F|^2``.

    For even ``N`` this counts the Nyquist mode with its full wavenumber,
    which is the norm the energy estimate is stated in.
    """
    return grid.spectral_sum(grid.transform(f), grid.lam)


def modified_energy(u_np1, u_n, u_nm1, sc: StabilityConstants, p: ModelParams, grid: SpectralGrid) -> float:
    return (
        energy(u_np1, p, grid)
        + sc.gamma1 * grad_norm_sq(grid, u_np1 - u_n)
        + sc.gamma3 * grad_norm_sq(grid, u_n - u_nm1)
    )


def energy_lower_bound(eps: float, L: float) -> float:
    """Lower bound of the continuous energy on ``(0, L)^2``."""
    if not (eps > 0 and L > 0):
        raise ValueError("eps and L must be positive")
    r = 4.0 * eps**2 * math.pi**2 / L**2
    return 0.5 * L**2 * (math.log(r) - r + 1.0)


def observables(u, p: ModelParams, grid: SpectralGrid, t: float = 0.0, modified: float = math.nan) -> Observables:
    u_hat = grid.transform(u)
    mean = float(u_hat[0, 0].real)
    area = grid.L**2
    dev = u - grid.mean(u)
    rough = math.sqrt(grid.h**2 * float(np.sum(dev * dev)) / area)
    gx, gy = grid.grad_hat(u_hat)
    slope = math.sqrt(grid.h**2 * float(np.sum(gx * gx + gy * gy)) / area)
    length = rough / slope if slope > 0 else math.nan
    return Observables(
        t=float(t),
        energy=energy_hat(grid, u_hat, p.eps),
        modified_energy=float(modified),
        roughness=rough,
        slope=slope,
        char_length=length,
        mass_mean=mean,
    )


# -- stability constants -------------------------------------------------------------


def stability_constants(p: ModelParams) -> StabilityConstants:
    """Constants of the modified-energy estimate and the admissible ``A``.

    The estimate assumes ``kappa >= 1/4``; for smaller ``kappa`` the
    constants are still returned (where defined) with ``hypotheses_met``
    false and a warning.
    """
    kappa, eps = float(p.kappa), float(p.eps)
    C4 = C_RATIO
    g1 = 1.5 * C4 * (1.0 + kappa)
    g2 = C4 * (1.0 + kappa)
    g3 = 0.5 * C4 * (1.0 + kappa)
    g0 = g1 + g2 + g3
    ok = kappa >= 0.25
    if kappa > 0:
        alpha0 = math.log((g0 + 0.5 * kappa) / (g0 - 0.5 * kappa))
        A_min = (g0 - 0.25 * kappa) ** 4 / alpha0**2 / eps**2
    else:
        alpha0 = math.nan
        A_min = math.nan
    if not ok:
        warnings.warn(
            f"kappa = {kappa} < 1/4: energy-stability hypotheses are not met",
            RuntimeWarning,
            stacklevel=2,
        )
    return StabilityConstants(
        kappa=kappa,
        eps=eps,
        kappa0=KAPPA0,
        kappa_star=kappa - KAPPA0,
        C4=C4,
        gamma1=g1,
        gamma2=g2,
        gamma3=g3,
        gamma0=g0,
        alpha0=alpha0,
        A_min=A_min,
        hypotheses_met=ok,
    )


@dataclass
class ConvexityReport:
    kappa0: float
    min_eigenvalue: float
    argmin: tuple[float, float]
    samples: int

    @property
    def convex(self) -> bool:
        return self.min_eigenvalue >= -1e-12


def _hessian_min_eig(a, b, kappa0):
    # H(a, b) = 1/2 ln(1 + a^2 + b^2) + kappa0/2 (a^2 + b^2)
    s = 1.0 + a * a + b * b
    haa = (s - 2.0 * a * a) / s**2 + kappa0
    hbb = (s - 2.0 * b * b) / s**2 + kappa0
    hab = -2.0 * a * b / s**2
    tr = haa + hbb
    disc = np.sqrt((haa - hbb) ** 2 + 4.0 * hab**2)
    return 0.5 * (tr - disc)


def convexity_check(kappa0: float, samples: int = 401, extent: float = 50.0) -> ConvexityReport:
    """Smallest Hessian eigenvalue of ``H`` over a square sample of ``[-extent, extent]^2``.

    The sample is the union of a uniform grid and a radial refinement near
    ``|v| = sqrt(3)``, where the eigenvalue of the log term bottoms out at
    ``-1/8``.
    """
    axis = np.linspace(-extent, extent, samples)
    A, B = np.meshgrid(axis, axis, indexing="ij")
    r = np.linspace(0.0, 4.0, samples)
    th = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
    R, T = np.meshgrid(r, th, indexing="ij")
    a = np.concatenate([A.ravel(), (R * np.cos(T)).ravel()])
    b = np.concatenate([B.ravel(), (R * np.sin(T)).ravel()])
    lam = _hessian_min_eig(a, b, kappa0)
    i = int(np.argmin(lam))
    return ConvexityReport(kappa0, float(lam[i]), (float(a[i]), float(b[i])), int(a.size))
