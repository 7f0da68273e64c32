import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from trunc_moments import calibrate, utgd
from trunc_moments.calibrate import (
    APPROX1_SET_I,
    Method,
    VarianceForm,
    calibrate_approx1,
    calibrate_approx2,
    calibrate_auto,
    dsigma1_dmu,
    point_slope,
    r_from_variance,
    sigma_approx1,
    sigma_approx2,
    sigma_newton,
    solve_U_approx1,
    solve_U_approx2,
    two_point,
)
from trunc_moments.utgd import Side, TruncatedGaussianSpec

# the two running examples: (mean, variance, cutoff)
A = (1.3, 3.0, -1.0)
B = (1.8, 0.4, 0.5)


class TestSingleFunctionalSolvers:
    def test_form_solutions_disagree_off_manifold(self):
        M, v, a = A
        s1 = sigma_newton(v, -0.995, a, M, VarianceForm.I)
        s2 = sigma_newton(v, -0.995, a, M, VarianceForm.II)
        assert s1 == pytest.approx(2.87179324, abs=1.5e-8)
        assert s2 == pytest.approx(0.24118430, abs=1.5e-8)
        s1 = sigma_newton(v, -0.7, a, M, VarianceForm.I)
        s2 = sigma_newton(v, -0.7, a, M, VarianceForm.II)
        assert s1 == pytest.approx(2.78224205, abs=1.5e-8)
        assert s2 == pytest.approx(14.47105787, abs=1.5e-8)

    @given(st.floats(min_value=-20.0, max_value=8.0))
    @settings(max_examples=60)
    def test_r_from_variance_roundtrip(self, r):
        # deep-left the curve flattens as 1/r^2, so the inverse can only be
        # as sharp as the forward evaluation noise divided by the slope
        vhat = utgd.normalized_variance(r)
        r_back = r_from_variance(vhat)
        assert r_back == pytest.approx(r, abs=1e-7 * max(1.0, r * r))

    def test_r_from_variance_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            r_from_variance(1.0)
        with pytest.raises(ValueError):
            r_from_variance(0.0)


class TestSlopes:
    @pytest.mark.parametrize("r", [-3.0, -0.5, 0.0, 0.6, 2.0, 5.0])
    def test_form1_slope_vs_finite_difference(self, r):
        # walk mu at fixed variance target and watch sigma respond
        a, target = 0.0, None
        sigma = 1.0
        mu = a + r * sigma
        target = utgd.var_form1(sigma, r)
        h = 1e-6
        sp = sigma_newton(target, mu + h, a, mu + 10.0, VarianceForm.I)
        sm = sigma_newton(target, mu - h, a, mu + 10.0, VarianceForm.I)
        assert dsigma1_dmu(r) == pytest.approx((sp - sm) / (2 * h), rel=1e-5)

    def test_form1_slope_extremum(self):
        res = minimize_scalar(dsigma1_dmu, bounds=(0.0, 2.0), method="bounded",
                              options={"xatol": 1e-12})
        assert res.x == pytest.approx(0.5987678543728484, abs=1e-7)
        assert res.fun == pytest.approx(-0.32470827114698586, abs=1e-10)

    def test_worked_example_slopes(self):
        M, v, a = A
        # tangent slope of the Form I level curve at the first probe
        s1 = sigma_newton(v, -0.995, a, M, VarianceForm.I)
        assert dsigma1_dmu((-0.995 - a) / s1) == pytest.approx(
            -0.30009822, abs=1.5e-8)
        # the Form II level curve is a line through (a, 0)
        s2 = sigma_newton(v, -0.995, a, M, VarianceForm.II)
        assert s2 / (-0.995 - a) == pytest.approx(48.23685957, abs=1.5e-8)


class TestApproximations:
    def test_approx1_dataset_a(self):
        M, v, a = A
        res = calibrate_approx1(M, v, a)
        assert res.mu0 == pytest.approx(-0.93790632, abs=1.5e-8)
        assert res.sigma0 == pytest.approx(2.85432733, abs=1.5e-8)
        assert res.var_achieved == pytest.approx(2.99938674, abs=1.5e-8)
        assert res.mean_achieved == pytest.approx(1.30013513, abs=1.5e-8)

    def test_approx2_dataset_b(self):
        M, v, a = B
        res = calibrate_approx2(M, v, a)
        assert res.mu0 == pytest.approx(1.74441942, abs=1.5e-8)
        assert res.sigma0 == pytest.approx(0.68720795, abs=1.5e-8)
        assert res.var_achieved == pytest.approx(0.40059879, abs=1.5e-8)
        assert res.mean_achieved == pytest.approx(1.79955814, abs=1.5e-8)

    def test_sigma_approx1_domain(self):
        with pytest.raises(ValueError):
            sigma_approx1(0.95)
        with pytest.raises(ValueError):
            sigma_approx2(0.5)

    @pytest.mark.parametrize("params", [None, APPROX1_SET_I])
    def test_fn1_envelope_coarse(self, params):
        # coarse sweep; the fine-grained envelope lives in the acceptance run
        kw = {} if params is None else {"params": params}
        for U in [i / 10 for i in range(-100, 10)]:
            exact = 1.0 / _s_of(_r_at_U(U))
            assert abs(sigma_approx1(U, **kw) - exact) / exact < 0.005

    def test_fn2_envelope_coarse(self):
        for U in [0.9, 0.95, 0.99, 0.999, 1.0 - 1e-6]:
            exact = 1.0 / _s_of(_r_at_U(U))
            assert abs(sigma_approx2(U) - exact) / exact < 0.009


def _s_of(r):
    return r + utgd.inverse_mills(r)


def _r_at_U(U, lo=-3000.0, hi=700.0):
    """Location r on the congruent manifold where mu sits at fraction U of
    the cutoff-to-mean distance (M=1, a=0)."""
    from scipy.optimize import brentq
    return brentq(lambda r: r / _s_of(r) - U, lo, hi, xtol=1e-14)


class TestIntersectionMethods:
    def test_two_point_dataset_a(self):
        M, v, a = A
        res = two_point(M, v, a, -0.995, -0.7)
        assert res.mu0 == pytest.approx(-0.94080581, abs=1.5e-8)
        assert res.sigma0 == pytest.approx(2.85534187, abs=1.5e-8)
        assert res.var_achieved == pytest.approx(2.99968031, abs=1.5e-8)
        assert res.mean_achieved == pytest.approx(1.29987745, abs=1.5e-8)

    def test_two_point_dataset_b(self):
        M, v, a = B
        res = two_point(M, v, a, 1.6, 1.64)
        assert res.mu0 == pytest.approx(1.74141742, abs=1.5e-8)
        assert res.sigma0 == pytest.approx(0.68426408, abs=1.5e-8)

    def test_point_slope_dataset_a(self):
        M, v, a = A
        r1 = point_slope(M, v, a, -0.995, rounds=1)
        assert r1.mu0 == pytest.approx(-0.94080194, abs=1.5e-8)
        assert r1.sigma0 == pytest.approx(2.85552850, abs=1.5e-8)
        r2 = point_slope(M, v, a, -0.995, rounds=2)
        assert r2.mu0 == pytest.approx(-0.94080265, abs=1.5e-8)
        assert r2.sigma0 == pytest.approx(2.85549402, abs=1.5e-8)
        assert r2.var_achieved == pytest.approx(3.0, abs=1.5e-8)
        assert r2.mean_achieved == pytest.approx(1.3, abs=1.5e-8)

    def test_point_slope_dataset_b(self):
        M, v, a = B
        rows = {k: point_slope(M, v, a, 1.6, rounds=k) for k in (1, 2, 3)}
        assert rows[1].mu0 == pytest.approx(1.74003554, abs=1.5e-8)
        assert rows[1].sigma0 == pytest.approx(0.68350240, abs=1.5e-8)
        assert rows[2].mu0 == pytest.approx(1.74527287, abs=1.5e-8)
        assert rows[2].sigma0 == pytest.approx(0.68638919, abs=1.5e-8)
        assert rows[3].mu0 == pytest.approx(1.74528023, abs=1.5e-8)
        assert rows[3].sigma0 == pytest.approx(0.68639325, abs=1.5e-8)
        assert rows[3].var_achieved == pytest.approx(0.4, abs=1.5e-8)
        assert rows[3].mean_achieved == pytest.approx(1.8, abs=1.5e-8)


class TestAutoPipeline:
    @pytest.mark.parametrize("case,seed", [(A, Method.APPROX1),
                                           (B, Method.APPROX2)])
    def test_converges_and_picks_seed(self, case, seed):
        M, v, a = case
        res = calibrate_auto(M, v, a)
        assert res.seed_method is seed
        assert res.mean_resid < 1e-12
        assert res.var_resid < 1e-12
        assert res.iterations <= 3

    def test_rejects_unattainable(self):
        with pytest.raises(ValueError):
            calibrate_auto(1.0, 1.1, 0.0)
        with pytest.raises(ValueError):
            calibrate_auto(1.0, -0.1, 0.0)

    def test_right_side(self):
        res = calibrate_auto(-1.3, 3.0, 1.0, side=Side.RIGHT)
        assert res.mu0 == pytest.approx(-(-0.94080265) + 2 * 0.0, abs=1e-6)
        spec = TruncatedGaussianSpec(res.mu0, res.sigma0, 1.0, Side.RIGHT)
        assert utgd.mean_from_params(spec) == pytest.approx(-1.3, rel=1e-12)

    @given(st.floats(min_value=0.02, max_value=0.98),
           st.floats(min_value=-2.0, max_value=2.0),
           st.floats(min_value=0.1, max_value=5.0))
    @settings(max_examples=40, deadline=None)
    def test_random_targets(self, vhat, a, d):
        M = a + d
        res = calibrate_auto(M, vhat * d * d, a)
        assert res.mean_resid < 1e-10
        assert res.var_resid < 1e-10


def test_switch_point_value():
    # normalized variance where the two approximating functions hand over
    assert calibrate.approx_switch_vhat() == pytest.approx(
        0.30160029345162614, abs=1e-12)
