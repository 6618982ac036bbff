import json
import math
import os

import numpy as np
import pytest

from nssetd.checkpoint import CheckpointError
from nssetd.config import InitialSpec, RunConfig, with_overrides
from nssetd.experiments import (
    CHECKPOINT_NAME,
    META_NAME,
    TRACE_NAME,
    CoarseningTrace,
    FitResult,
    ManufacturedSolution,
    convergence_error,
    fit_scaling,
    initial_field,
    plot_script,
    run_coarsening,
    run_convergence,
    saturation_estimate,
)
from nssetd.model import ModelParams, energy_lower_bound, nonlinear_f
from nssetd.series import read_series
from nssetd.spectral import make_grid


def small_coarsening(**kw):
    base = dict(
        params=ModelParams(eps=0.1, kappa=0.25, A=1.0),
        N=24,
        L=1.0,
        schedule=((0.2, 0.002), (0.6, 0.01)),
        sample_every=0.02,
        initial=InitialSpec(seed=5, amplitude=0.1),
    )
    base.update(kw)
    return RunConfig(**base)


class TestManufactured:
    def test_forcing_balances_equation(self):
        g = make_grid(17, 1.0)
        ms = ManufacturedSolution(g, 0.5)
        t, d = 0.3, 1e-5
        dudt = (ms.exact(t + d) - ms.exact(t - d)) / (2 * d)
        u = ms.exact(t)
        residual = dudt + nonlinear_f(u, ModelParams(eps=0.5, kappa=0.0), g) + 0.25 * g.bilaplacian(u) - ms.forcing(t)
        assert np.max(np.abs(residual)) < 1e-6 * np.max(np.abs(ms.forcing(t)))

    def test_smoke_two_values(self):
        cfg = RunConfig(
            params=ModelParams(eps=0.5, kappa=0.125, A=1.0), N=16, kind="convergence",
            N_values=(16, 24), final_time=0.25,
        )
        res = run_convergence(cfg)
        assert [r[0] for r in res.rows] == [16, 24]
        assert all(r[3] > 0 and r[4] > 0 and r[5] > 0 for r in res.rows)
        assert set(res.orders) == {"l1", "l2", "linf"}
        assert all(math.isfinite(v) for v in res.orders.values())
        assert all(math.isnan(v) for v in res.stderr.values())

    def test_parallel_sweep_matches_serial(self):
        cfg = RunConfig(
            params=ModelParams(eps=0.5, kappa=0.125, A=1.0), N=16, kind="convergence",
            N_values=(16, 20, 24), final_time=0.125,
        )
        assert run_convergence(cfg, workers=3).rows == run_convergence(cfg).rows

    def test_temporal_error_ratio(self):
        # the manufactured profile is resolved exactly, so halving dt is all that changes
        cfg = RunConfig(
            params=ModelParams(eps=0.5, kappa=0.125, A=1.0), N=64, kind="convergence", final_time=1.0,
        )
        e1 = convergence_error(64, with_overrides(cfg, dt_factor=0.5))
        e2 = convergence_error(64, with_overrides(cfg, dt_factor=0.25))
        assert e1[4] / e2[4] == pytest.approx(8.0, rel=0.1)

    def test_last_step_shortened(self):
        cfg = RunConfig(
            params=ModelParams(eps=0.5, kappa=0.125, A=1.0), N=16, kind="convergence", final_time=0.1,
            dt_factor=0.3,
        )
        with pytest.warns(UserWarning, match="shortened"):
            row = convergence_error(16, cfg)
        assert row[3] < 1e-5


class TestFits:
    def test_power_law_roundtrip(self):
        t = np.linspace(10, 400, 100)
        fit = fit_scaling({"t": t, "roughness": 0.4071 * t**0.5001}, "roughness")
        assert fit.model == "loglog"
        assert fit.a == pytest.approx(0.4071, abs=1e-10)
        assert fit.b == pytest.approx(0.5001, abs=1e-10)
        assert fit.residual_rms < 1e-12
        np.testing.assert_allclose(fit(t), 0.4071 * t**0.5001, rtol=1e-12)

    def test_semilog_roundtrip(self):
        t = np.geomspace(1, 1000, 200)
        fit = fit_scaling({"t": t, "energy": -41.0983 * np.log(t) - 148.6410}, "energy")
        assert fit.model == "semilog"
        assert fit.a == pytest.approx(-41.0983, abs=1e-10)
        assert fit.b == pytest.approx(-148.6410, abs=1e-10)
        assert fit.window == (10.0, 400.0) and fit.n == int(np.sum((t >= 10) & (t <= 400)))

    def test_needs_ten_samples(self):
        t = np.linspace(10, 400, 9)
        with pytest.raises(ValueError, match="samples"):
            fit_scaling({"t": t, "slope": t}, "slope")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            fit_scaling({"t": [1.0]}, "mass")

    def test_subsampling_invariance(self):
        rng = np.random.default_rng(0)
        t = np.arange(10.0, 401.0)
        h = 0.4 * t**0.5 * np.exp(0.02 * rng.standard_normal(t.size))
        full = fit_scaling({"t": t, "roughness": h}, "roughness")
        half = fit_scaling({"t": t[::2], "roughness": h[::2]}, "roughness")
        assert half.b == pytest.approx(full.b, rel=0.02)

    def test_saturation_closed_form(self):
        fit = FitResult("energy", "semilog", (10.0, 400.0), -1.0, 0.0, 0.0, 10)
        assert saturation_estimate(fit, -10.0) == pytest.approx(math.exp(10.0), rel=1e-15)

    def test_saturation_reported_values(self):
        gamma = energy_lower_bound(0.02, 12.8)
        fit = FitResult("energy", "semilog", (10.0, 400.0), -41.0983, -148.6410, 0.0, 10)
        t_star = saturation_estimate(fit, gamma)
        assert -41.0983 * math.log(t_star) - 148.6410 == pytest.approx(gamma, rel=1e-13)
        assert 1e5 < t_star < 1e6

    def test_saturation_needs_decay(self):
        for a in (0.0, 1.0):
            with pytest.raises(ValueError):
                saturation_estimate(FitResult("energy", "semilog", (1, 2), a, 0.0, 0.0, 10), -1.0)
        with pytest.raises(ValueError):
            saturation_estimate(FitResult("slope", "loglog", (1, 2), 1.0, -0.5, 0.0, 10), -1.0)

    def test_plot_script(self):
        fit = FitResult("roughness", "loglog", (10.0, 400.0), 0.4, 0.5, 0.0, 10)
        text = plot_script(fit, "/data/trace.csv", "roughness")
        assert "set logscale xy" in text
        assert "using 1:4" in text
        assert "0.4*x**0.5" in text


class TestCoarsening:
    def test_initial_field(self):
        cfg = small_coarsening()
        g = make_grid(cfg.N, cfg.L)
        u = initial_field(g, cfg)
        assert abs(g.mean(u)) < 1e-16
        np.testing.assert_array_equal(u, initial_field(g, cfg))
        rough = initial_field(g, with_overrides(cfg, initial=InitialSpec(seed=5, amplitude=0.1, smooth=False)))
        assert np.max(np.abs(rough)) <= 0.2
        assert np.std(u) < np.std(rough)
        with pytest.raises(ValueError):
            initial_field(g, with_overrides(cfg, initial=InitialSpec(kind="gaussian")))

    def test_trace_well_formed(self, tmp_path):
        cfg = small_coarsening()
        trace = run_coarsening(cfg, output_dir=tmp_path)
        t = trace.column("t")
        assert np.all(np.diff(t) > 0)
        assert t[0] == 0.0 and t[-1] == pytest.approx(0.6)
        np.testing.assert_allclose(np.diff(t), 0.02, atol=1e-9)
        mass = trace.column("mass_mean")
        assert np.max(np.abs(mass - mass[0])) <= 1e-10
        assert np.all(trace.column("energy") >= energy_lower_bound(0.1, 1.0) - 1e-8)
        # modified energy is nonincreasing inside each constant-dt segment
        mod = trace.column("modified_energy")
        for lo, hi in ((0.0, 0.2), (0.2, 0.6)):
            sel = (t > lo + 1e-9) & (t <= hi + 1e-9)
            assert np.all(np.diff(mod[sel]) <= 1e-10)
        assert sorted(os.listdir(tmp_path)) == sorted([TRACE_NAME, META_NAME, CHECKPOINT_NAME])
        meta = json.loads((tmp_path / META_NAME).read_text())
        assert meta["initial"]["seed"] == 5 and meta["schedule"] == [[0.2, 0.002], [0.6, 0.01]]
        data = read_series(tmp_path / TRACE_NAME)
        np.testing.assert_array_equal(data["energy"], trace.column("energy"))

    def test_resume_is_bit_identical(self, tmp_path):
        cfg = small_coarsening(checkpoint_every=0.1)
        a, b = tmp_path / "a", tmp_path / "b"
        run_coarsening(cfg, output_dir=a)
        run_coarsening(cfg, output_dir=b, stop_time=0.3)
        mid = read_series(b / TRACE_NAME)["t"][-1]
        assert mid == pytest.approx(0.3)
        run_coarsening(cfg, output_dir=b, resume_from=b / CHECKPOINT_NAME)
        for name in (TRACE_NAME, CHECKPOINT_NAME):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_resume_from_periodic_checkpoint_drops_later_rows(self, tmp_path):
        cfg = small_coarsening(checkpoint_every=0.1)
        a, b = tmp_path / "a", tmp_path / "b"
        run_coarsening(cfg, output_dir=a)
        run_coarsening(cfg, output_dir=b, stop_time=0.3)
        saved = (b / CHECKPOINT_NAME).read_bytes()
        # a crash after t = 0.3 leaves trace rows newer than the checkpoint
        run_coarsening(cfg, output_dir=b, stop_time=0.35)
        assert read_series(b / TRACE_NAME)["t"][-1] == pytest.approx(0.34)
        (b / CHECKPOINT_NAME).write_bytes(saved)
        run_coarsening(cfg, output_dir=b, resume_from=b / CHECKPOINT_NAME)
        assert (a / TRACE_NAME).read_bytes() == (b / TRACE_NAME).read_bytes()

    def test_resume_refuses_other_config(self, tmp_path):
        cfg = small_coarsening()
        run_coarsening(cfg, output_dir=tmp_path, stop_time=0.1)
        other = with_overrides(cfg, params=ModelParams(eps=0.12, kappa=0.25, A=1.0))
        with pytest.raises(CheckpointError):
            run_coarsening(other, output_dir=tmp_path, resume_from=tmp_path / CHECKPOINT_NAME)

    def test_trace_from_csv(self, tmp_path):
        trace = run_coarsening(small_coarsening(), output_dir=tmp_path)
        again = CoarseningTrace.from_csv(tmp_path / TRACE_NAME)
        assert again.as_rows() == trace.as_rows()
