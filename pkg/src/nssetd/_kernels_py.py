"""Reference numpy implementation of the stepping kernels.

Each routine spells out the same floating-point operations, in the same
order, as its twin in ``_ckernels.pyx`` so the two backends agree bit for
bit.  ``log_sum`` has no compiled twin; numpy's vectorized version is
faster than a scalar loop.
"""

import numpy as np


def beta_flux(gx, gy, kappa, out_x, out_y):
    """out = g / (1 + |g|^2) + kappa g, pointwise."""
    d = 1.0 + (gx * gx + gy * gy)
    np.add(gx / d, kappa * gx, out=out_x)
    np.add(gy / d, kappa * gy, out=out_y)


def log_sum(gx, gy):
    """sum of log(1 + |g|^2) over the grid."""
    return float(np.sum(np.log1p(gx * gx + gy * gy)))


def assemble_f_hat(bx_hat, by_hat, u_hat, kx, ky, lam, kappa, out):
    """out = i kx Bx + i ky By - kappa lam U."""
    kx = kx[:, None]
    ky = ky[None, :]
    kl = kappa * lam
    out.real = -(kx * bx_hat.imag) - ky * by_hat.imag - kl * u_hat.real
    out.imag = kx * bx_hat.real + ky * by_hat.real - kl * u_hat.imag


def etd3_combine(u_hat, n0, n1, n2, exp_neg, phi0, phi1, phi2, reg, denom, dt, out):
    """Regularized third-order ETD update, mode by mode."""
    for part in ("real", "imag"):
        u = getattr(u_hat, part)
        a = getattr(n0, part)
        b = getattr(n1, part)
        c = getattr(n2, part)
        num = (
            exp_neg * u
            + reg * u
            - dt * phi0 * a
            - dt * phi1 * (1.5 * a - 2.0 * b + 0.5 * c)
            - dt * phi2 * (0.5 * a - b + 0.5 * c)
        )
        setattr(out, part, num / denom)
