import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nssetd.etdphi import C_RATIO, build_tables, check_operator_bounds, eigenvalues, eval_g
from nssetd.spectral import make_grid


def oracle(x):
    """High-precision closed forms.

    The closed form of g2 loses about three digits per decade below 1, so
    the working precision grows with -log10(x).
    """
    if x == 0:
        return (1.0, 0.5, 1.0 / 3.0)
    digits = 40 + 3 * max(0, -math.floor(math.log10(x)))
    with mpmath.workdps(digits):
        x = mpmath.mpf(x)
        e = mpmath.exp(-x)
        return (
            float((1 - e) / x),
            float((x - 1 + e) / x**2),
            float((x**2 - 2 * x + 2 - 2 * e) / x**3),
        )


SAMPLES = [0.0, 1e-300, 1e-12, 1e-9, 1e-6, 1e-3, 0.01, 0.3, 0.999, 1.0, 1.001, 2.0, 7.5, 40.0, 699.0, 701.0, 1e5, 1e12]


class TestEvalG:
    @pytest.mark.parametrize("x", SAMPLES)
    def test_matches_high_precision(self, x):
        got = eval_g(x)
        want = oracle(x)
        for a, b in zip(got, want):
            assert a == pytest.approx(b, rel=1e-13, abs=0)

    def test_known_values(self):
        # mpmath at 50 digits
        assert eval_g(2.0)[0] == pytest.approx(0.432332358381694, rel=1e-14)
        g = eval_g(1e-9)
        assert g[0] == pytest.approx(0.99999999950000000017, rel=1e-15)
        assert g[1] == pytest.approx(0.49999999983333333337, rel=1e-15)
        assert g[2] == pytest.approx(0.33333333325000000002, rel=1e-15)

    def test_array_matches_scalar(self):
        x = np.array(SAMPLES)
        arr = eval_g(x)
        for i, xi in enumerate(SAMPLES):
            assert tuple(a[i] for a in arr) == eval_g(xi)

    def test_scalar_returns_floats(self):
        assert all(type(v) is float for v in eval_g(0.5))

    @pytest.mark.parametrize("bad", [-1e-300, -1.0, math.nan, math.inf])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            eval_g(bad)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.0, 50.0))
    def test_random_against_oracle(self, x):
        for a, b in zip(eval_g(x), oracle(x)):
            assert a == pytest.approx(b, rel=2e-15, abs=1e-300)

    def test_continuous_at_switchover(self):
        lo, hi = np.nextafter(1.0, 0.0), np.nextafter(1.0, 2.0)
        for a, b in zip(eval_g(lo), eval_g(hi)):
            assert abs(a - b) < 1e-15

    def test_decreasing(self):
        x = np.concatenate([[0.0], np.logspace(-8, 2, 9999)])
        for g in eval_g(x):
            assert np.all(np.diff(g) <= 1e-14)

    def test_ratio_bounds(self):
        x = np.concatenate([[0.0], np.logspace(-8, 2, 9999)])
        g0, g1, g2 = eval_g(x)
        assert np.max(g1 / g0) <= C_RATIO
        assert np.max(g2 / g0) <= C_RATIO

    def test_ratio_constant(self):
        assert C_RATIO == pytest.approx(1.156517642749666, rel=1e-15)


class TestTables:
    def test_eigenvalue_value(self):
        # eps = 0.5, kappa = 1/8 on the unit box, mode (1, 0)
        g = make_grid(16, 1.0)
        lam = eigenvalues(g, 0.5, 0.125)
        assert lam[1, 0] == pytest.approx(394.571166337, rel=1e-11)
        assert lam[0, 0] == 0.0

    def test_table_identities(self):
        g = make_grid(17, 1.0)
        tb = build_tables(g, 0.1, 0.25, 2.0, 0.05)
        x = tb.dt * tb.Lambda
        np.testing.assert_array_equal(tb.exp_neg, np.exp(-x))
        g0, g1, g2 = eval_g(x)
        np.testing.assert_array_equal(tb.phi0, g0)
        np.testing.assert_allclose(tb.G1 * tb.phi0, g1, rtol=1e-15)
        np.testing.assert_allclose(tb.calG * tb.phi0, 1.0, rtol=1e-15)
        np.testing.assert_allclose(tb.calG_half**2, tb.calG, rtol=1e-15)
        np.testing.assert_allclose(tb.reg, 2.0 * 0.05**3 * g0 * g.lam**2, rtol=1e-15)
        np.testing.assert_array_equal(tb.reg_denom, 1.0 + tb.reg)
        assert tb.G1.max() <= C_RATIO and tb.G2.max() <= C_RATIO

    def test_tables_are_read_only_and_cached(self):
        g = make_grid(8)
        a = build_tables(g, 0.1, 0.25, 1.0, 0.01)
        assert build_tables(g, 0.1, 0.25, 1.0, 0.01) is a
        with pytest.raises(ValueError):
            a.phi0[0, 0] = 2.0

    @pytest.mark.parametrize("kw", [dict(eps=0.0), dict(kappa=-1.0), dict(A=-1.0), dict(dt=0.0)])
    def test_rejects_bad_parameters(self, kw):
        args = dict(eps=0.1, kappa=0.25, A=0.0, dt=0.01) | kw
        with pytest.raises(ValueError):
            build_tables(make_grid(8), **args)


class TestOperatorBounds:
    @pytest.mark.parametrize("N", [16, 32, 33])
    @pytest.mark.parametrize("dt", [1e-4, 0.1, 10.0])
    def test_random_fields(self, N, dt):
        g = make_grid(N, 1.0)
        tb = build_tables(g, 0.1, 0.25, 0.0, dt)
        rng = np.random.default_rng(N)
        for _ in range(10):
            f = rng.standard_normal(g.shape)
            f -= f.mean()
            rep = check_operator_bounds(g, tb, f)
            assert rep.ok, rep.violations

    def test_requires_mean_zero(self):
        g = make_grid(8)
        with pytest.raises(ValueError):
            check_operator_bounds(g, build_tables(g, 0.1, 0.25, 0.0, 0.1), np.ones(g.shape))

    def test_reports_violation_with_mode(self):
        # a table doctored past the bound must be caught and located
        from dataclasses import replace

        g = make_grid(8)
        tb = build_tables(g, 0.1, 0.25, 0.0, 0.1)
        G1 = tb.G1.copy()
        G1[2, 1] = 5.0
        f = np.cos(2 * np.pi * 2 * g.mesh()[0]) * np.cos(2 * np.pi * g.mesh()[1])
        rep = check_operator_bounds(g, replace(tb, G1=G1), f)
        assert not rep.ok
        (v,) = [v for v in rep.violations if v["check"] == "iv-G1"]
        assert v["mode"] == (2, 1)
