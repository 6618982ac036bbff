"""Reproduction drivers: manufactured-solution convergence and coarsening runs."""

from __future__ import annotations

import json
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import checkpoint as ckpt
from .config import RunConfig
from .model import (
    ModelParams,
    Observables,
    grad_norm_sq,
    nonlinear_f,
    observables,
    stability_constants,
)
from .schemes import STEPPERS, SchemeState, change_dt, init_state
from .series import (
    CONVERGENCE_COLUMNS,
    TRACE_COLUMNS,
    atomic_write_text,
    read_series,
    write_series,
)
from .spectral import SpectralGrid, make_grid

log = logging.getLogger(__name__)


# -- convergence study -----------------------------------------------------------------


class ManufacturedSolution:
    """``U = sin(2 pi x / L) cos(2 pi y / L) cos(t)`` with its balancing source.

    The source ``F = U_t + div(grad U / (1 + |grad U|^2)) + eps^2 Delta^2 U``
    is built pseudo-spectrally from the sampled profile, so the sampled
    ``U`` solves the semi-discrete system exactly and measured errors are
    purely temporal.
    """

    def __init__(self, grid: SpectralGrid, eps: float):
        self.grid = grid
        self.eps = eps
        X, Y = grid.mesh()
        k = 2.0 * np.pi / grid.L
        self.shape = np.sin(k * X) * np.cos(k * Y)
        self._bilap = grid.bilaplacian(self.shape)
        self._flux_params = ModelParams(eps=eps, kappa=0.0)

    def exact(self, t: float) -> np.ndarray:
        return self.shape * math.cos(t)

    def forcing(self, t: float) -> np.ndarray:
        c = math.cos(t)
        u = self.shape * c
        return (
            -self.shape * math.sin(t)
            + nonlinear_f(u, self._flux_params, self.grid)
            + self.eps**2 * c * self._bilap
        )


@dataclass
class ConvergenceResult:
    rows: list  # (N, h, dt, err_l1, err_l2, err_linf)
    orders: dict  # norm -> fitted order (minus the log-log slope vs N)
    stderr: dict

    columns = CONVERGENCE_COLUMNS

    def as_rows(self):
        return [tuple(r) for r in self.rows]


def fit_order(N_values, errors):
    """Least-squares order ``p`` in ``err ~ C N^-p`` and its standard error."""
    x = np.log(np.asarray(N_values, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    n = len(x)
    if n > 2:
        resid = y - A @ coef
        s2 = float(resid @ resid) / (n - 2)
        se = math.sqrt(s2 / float(np.sum((x - x.mean()) ** 2)))
    else:
        se = math.nan
    return -float(coef[0]), se


def convergence_error(N: int, cfg: RunConfig, startup: str | None = None):
    grid = make_grid(N, cfg.L)
    p = cfg.params
    ms = ManufacturedSolution(grid, p.eps)
    T = cfg.final_time
    dt = cfg.dt_factor * grid.h
    n_steps = int(math.floor(T / dt + 1e-9))
    s = init_state(
        grid, ms.exact(0.0), dt, p,
        startup=startup or cfg.startup, forcing=ms.forcing, exact=ms.exact,
    )
    step = STEPPERS[cfg.scheme]
    for _ in range(n_steps):
        s = step(s)
    rest = T - s.t
    if rest > 1e-12 * T:
        # shorten the last step so the run lands on T
        warnings.warn(f"N={N}: T/dt not integral, last step shortened to {rest:.3g}")
        s = step(change_dt(s, rest))
    err = grid.norms(s.u_n - ms.exact(s.t))
    return (N, grid.h, dt, err.l1, err.l2, err.linf)


def run_convergence(cfg: RunConfig, workers: int = 1) -> ConvergenceResult:
    """Manufactured-solution study over ``cfg.N_values`` with ``dt = dt_factor h``."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda n: convergence_error(n, cfg), cfg.N_values))
    else:
        rows = [convergence_error(n, cfg) for n in cfg.N_values]
    Ns = [r[0] for r in rows]
    orders, stderr = {}, {}
    for name, col in (("l1", 3), ("l2", 4), ("linf", 5)):
        if len(rows) >= 2:
            orders[name], stderr[name] = fit_order(Ns, [r[col] for r in rows])
        else:
            orders[name], stderr[name] = math.nan, math.nan
    return ConvergenceResult(rows=rows, orders=orders, stderr=stderr)


# -- coarsening ---------------------------------------------------------------------------


@dataclass
class CoarseningTrace:
    rows: list = field(default_factory=list)  # Observables
    meta: dict = field(default_factory=dict)

    columns = TRACE_COLUMNS

    def as_rows(self):
        return [tuple(getattr(o, c) for c in TRACE_COLUMNS) for o in self.rows]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(o, name) for o in self.rows], dtype=float)

    @classmethod
    def from_csv(cls, path, meta=None) -> "CoarseningTrace":
        data = read_series(path)
        n = len(data["t"])
        rows = [Observables(*(float(data[c][i]) for c in TRACE_COLUMNS)) for i in range(n)]
        return cls(rows=rows, meta=dict(meta or {}))


def initial_field(grid: SpectralGrid, cfg: RunConfig) -> np.ndarray:
    """Seeded uniform noise in ``[-amplitude, amplitude]``, mean removed.

    With ``smooth`` the noise is passed once through ``exp(-dt0 L_N)``
    using the first scheduled step.
    """
    ini = cfg.initial
    if ini.kind == "manufactured":
        return ManufacturedSolution(grid, cfg.params.eps).exact(0.0)
    if ini.kind != "random":
        raise ValueError(f"unknown initial data kind {ini.kind!r}")
    rng = np.random.default_rng(ini.seed)
    u = rng.uniform(-ini.amplitude, ini.amplitude, size=grid.shape)
    u -= u.mean()
    if ini.smooth:
        p = cfg.params
        dt0 = cfg.schedule[0][1]
        Lam = p.eps**2 * grid.lam**2 + p.kappa * grid.lam
        u = grid.inverse_transform(np.exp(-dt0 * Lam) * grid.transform(u))
    return u


def _trace_meta(cfg: RunConfig, backend: str) -> dict:
    return dict(
        eps=cfg.params.eps,
        kappa=cfg.params.kappa,
        A=cfg.params.A,
        dealias=cfg.params.dealias,
        L=cfg.L,
        N=cfg.N,
        scheme=cfg.scheme,
        schedule=[list(s) for s in cfg.schedule],
        initial=asdict(cfg.initial),
        sample_every=cfg.sample_every,
        backend=backend,
    )


class _Sampler:
    """Index of the last cadence slot reached; derived from ``t`` alone so a
    resumed run samples at exactly the same steps."""

    def __init__(self, every: float):
        self.every = every
        self.last = -1

    def slot(self, t: float, dt: float) -> int:
        return int(math.floor((t + 0.5 * dt) / self.every))

    def due(self, t: float, dt: float) -> bool:
        k = self.slot(t, dt)
        if k > self.last:
            self.last = k
            return True
        return False


def sample(s: SchemeState, sc) -> Observables:
    obs = observables(s.u_n, s.params, s.grid, t=s.t)
    mod = (
        obs.energy
        + sc.gamma1 * grad_norm_sq(s.grid, s.u[0] - s.u[1])
        + sc.gamma3 * grad_norm_sq(s.grid, s.u[1] - s.u[2])
    )
    return Observables(
        t=obs.t,
        energy=obs.energy,
        modified_energy=mod,
        roughness=obs.roughness,
        slope=obs.slope,
        char_length=obs.char_length,
        mass_mean=obs.mass_mean,
    )


TRACE_NAME = "trace.csv"
META_NAME = "trace.meta.json"
CHECKPOINT_NAME = "checkpoint.bin"


def run_coarsening(
    cfg: RunConfig,
    resume_from=None,
    output_dir=None,
    stop_time: float | None = None,
    write: bool = True,
) -> CoarseningTrace:
    """Advance through ``cfg.schedule`` sampling observables on a fixed cadence.

    Parameters
    ----------
    resume_from : path, optional
        Checkpoint to continue from.  Its grid and model parameters must
        match ``cfg``; trace rows recorded after the checkpoint time are
        dropped and regenerated.
    stop_time : float, optional
        Stop early (after the step reaching this time) and checkpoint; used
        to split a run for restart testing.
    write : bool
        Write ``trace.csv``, its metadata and the final checkpoint to the
        output directory.
    """
    from .kernels import BACKEND

    out = output_dir or cfg.resolved_output_dir()
    trace_path = os.path.join(out, TRACE_NAME)
    ckpt_path = os.path.join(out, CHECKPOINT_NAME)
    meta = _trace_meta(cfg, BACKEND)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sc = stability_constants(cfg.params)
    step = STEPPERS[cfg.scheme]

    sampler = _Sampler(cfg.sample_every)
    checkpointer = _Sampler(cfg.checkpoint_every) if cfg.checkpoint_every > 0 else None

    if resume_from is not None:
        s = ckpt.read_checkpoint(resume_from)
        ckpt.check_compatible(s, cfg)
        if os.path.exists(trace_path):
            trace = CoarseningTrace.from_csv(trace_path, meta)
            trace.rows = [r for r in trace.rows if r.t <= s.t]
        else:
            trace = CoarseningTrace(meta=meta)
        sampler.last = sampler.slot(s.t, s.dt)
        if checkpointer:
            checkpointer.last = checkpointer.slot(s.t, s.dt)
        log.info("resuming at t=%g (step %d)", s.t, s.step_count)
    else:
        grid = make_grid(cfg.N, cfg.L)
        u0 = initial_field(grid, cfg)
        s = init_state(grid, u0, cfg.schedule[0][1], cfg.params, startup=cfg.startup)
        trace = CoarseningTrace(meta=meta)
        sampler.due(s.t, s.dt)
        if checkpointer:
            checkpointer.due(s.t, s.dt)
        trace.rows.append(sample(s, sc))

    def flush():
        if write:
            write_series(trace, trace_path)
            atomic_write_text(os.path.join(out, META_NAME), json.dumps(meta, indent=2) + "\n")
            ckpt.write_checkpoint(s, ckpt_path)

    stopped = False
    for t_end, dt in cfg.schedule:
        if s.t >= t_end - 0.5 * s.dt:
            continue
        if dt != s.dt:
            s = change_dt(s, dt, restart="copy-initial" if cfg.startup == "exact" else cfg.startup)
        while s.t < t_end - 0.5 * dt:
            s = step(s)
            if sampler.due(s.t, dt):
                trace.rows.append(sample(s, sc))
            if checkpointer and checkpointer.due(s.t, dt):
                flush()
            if stop_time is not None and s.t >= stop_time - 0.5 * dt:
                stopped = True
                break
        if stopped:
            break

    trace.meta["final_t"] = s.t
    trace.meta["steps"] = s.step_count
    trace.state = s
    flush()
    return trace


# -- scaling fits ------------------------------------------------------------------------------

FIT_KINDS = {
    "energy": ("energy", "semilog"),
    "roughness": ("roughness", "loglog"),
    "slope": ("slope", "loglog"),
}


@dataclass(frozen=True)
class FitResult:
    kind: str
    model: str  # "semilog": a ln t + b;  "loglog": a t^b
    window: tuple
    a: float
    b: float
    residual_rms: float
    n: int

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.model == "semilog":
            return self.a * np.log(t) + self.b
        return self.a * t**self.b


def fit_scaling(trace, kind: str, window=(10.0, 400.0), min_samples: int = 10) -> FitResult:
    """Ordinary least squares on ``(ln t, y)`` or ``(ln t, ln y)``.

    ``trace`` is a :class:`CoarseningTrace` or a mapping with ``"t"`` and the
    fitted column.
    """
    if kind not in FIT_KINDS:
        raise ValueError(f"fit kind must be one of {sorted(FIT_KINDS)}, got {kind!r}")
    column, model = FIT_KINDS[kind]
    if isinstance(trace, CoarseningTrace):
        t, y = trace.column("t"), trace.column(column)
    else:
        t, y = np.asarray(trace["t"], dtype=float), np.asarray(trace[column], dtype=float)
    lo, hi = window
    sel = (t >= lo) & (t <= hi) & np.isfinite(y)
    if model == "loglog":
        sel &= y > 0
    if np.count_nonzero(sel) < min_samples:
        raise ValueError(f"only {np.count_nonzero(sel)} samples in window {window}; need {min_samples}")
    x = np.log(t[sel])
    yy = y[sel] if model == "semilog" else np.log(y[sel])
    M = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(M, yy, rcond=None)
    resid = yy - M @ np.array([slope, icpt])
    rms = float(np.sqrt(np.mean(resid**2)))
    if model == "semilog":
        a, b = float(slope), float(icpt)
    else:
        a, b = float(np.exp(icpt)), float(slope)
    return FitResult(kind, model, (float(lo), float(hi)), a, b, rms, int(np.count_nonzero(sel)))


def saturation_estimate(fit: FitResult, gamma: float) -> float:
    """Time at which the fitted ``a ln t + b`` reaches the energy floor ``gamma``."""
    if fit.model != "semilog":
        raise ValueError("saturation estimate needs the semilog energy fit")
    if not fit.a < 0:
        raise ValueError(f"energy fit slope must be negative, got a = {fit.a}")
    return math.exp((gamma - fit.b) / fit.a)


def plot_script(fit: FitResult, data_path: str, column: str) -> str:
    """A gnuplot script that overlays ``fit`` on the data in ``data_path``."""
    cols = list(TRACE_COLUMNS)
    ycol = cols.index(column) + 1 if column in cols else 2
    if fit.model == "semilog":
        f = f"{fit.a!r}*log(x) + {fit.b!r}"
        scale = "set logscale x"
    else:
        f = f"{fit.a!r}*x**{fit.b!r}"
        scale = "set logscale xy"
    return "\n".join(
        [
            "set datafile separator ','",
            "set key top left",
            scale,
            "set xlabel 't'",
            f"set ylabel '{column}'",
            f"fit_{fit.kind}(x) = {f}",
            f"set arrow from {fit.window[0]!r}, graph 0 to {fit.window[0]!r}, graph 1 nohead dt 2",
            f"set arrow from {fit.window[1]!r}, graph 0 to {fit.window[1]!r}, graph 1 nohead dt 2",
            f"plot '{data_path}' every ::1 using 1:{ycol} with lines title '{column}', \\",
            f"     fit_{fit.kind}(x) with lines title 'fit'",
            "",
        ]
    )
