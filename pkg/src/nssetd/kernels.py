"""Backend selection for the stepping kernels.

The compiled extension is used when it imports; set ``NSSETD_PURE_PYTHON=1``
to force the numpy reference implementation.  Both backends expose the same
signatures on ordinary (complex) arrays.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

from . import _kernels_py


def _wrap_compiled(mod):
    def _f64(z):
        return z.view(np.float64)

    def assemble_f_hat(bx_hat, by_hat, u_hat, kx, ky, lam, kappa, out):
        mod.assemble_f_hat(_f64(bx_hat), _f64(by_hat), _f64(u_hat), kx, ky, lam, kappa, _f64(out))

    def etd3_combine(u_hat, n0, n1, n2, exp_neg, phi0, phi1, phi2, reg, denom, dt, out):
        mod.etd3_combine(
            _f64(u_hat), _f64(n0), _f64(n1), _f64(n2),
            exp_neg, phi0, phi1, phi2, reg, denom, dt, _f64(out),
        )

    return SimpleNamespace(
        beta_flux=mod.beta_flux,
        # numpy's vectorized log1p and pairwise sum beat a scalar libm loop
        log_sum=_kernels_py.log_sum,
        assemble_f_hat=assemble_f_hat,
        etd3_combine=etd3_combine,
    )


def backend_module(name: str):
    """Return the kernel namespace for ``name`` in {"python", "cython"}."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels

        return _wrap_compiled(_ckernels)
    raise ValueError(f"unknown kernel backend {name!r}")


BACKEND = "python"
_impl = _kernels_py
if os.environ.get("NSSETD_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        _impl = backend_module("cython")
        BACKEND = "cython"
    except ImportError:
        pass

beta_flux = _impl.beta_flux
log_sum = _impl.log_sum
assemble_f_hat = _impl.assemble_f_hat
etd3_combine = _impl.etd3_combine
