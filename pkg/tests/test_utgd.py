import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trunc_moments import oracle, utgd
from trunc_moments.utgd import Side, TruncatedGaussianSpec

SQRT_2_PI = math.sqrt(2.0 / math.pi)


def mp_core(r, dps=50):
    """High-precision (t, s, vhat) straight from the defining integrals."""
    with mpmath.workdps(dps):
        r_ = mpmath.mpf(r)
        t = mpmath.sqrt(2 / mpmath.pi) / (mpmath.exp(r_ ** 2 / 2)
                                          * mpmath.erfc(-r_ / mpmath.sqrt(2)))
        s = r_ + t
        q = 1 - r_ * t - t * t
        return float(t), float(s), float(q / (s * s))


def test_inverse_mills_at_zero():
    assert utgd.inverse_mills(0.0) == pytest.approx(SQRT_2_PI, rel=1e-15)


@given(st.floats(min_value=-300.0, max_value=35.0))
def test_inverse_mills_positive_and_dominates_r(r):
    t = utgd.inverse_mills(r)
    assert t > 0.0
    assert r + t > 0.0  # the truncated mean always exceeds the cutoff


@pytest.mark.parametrize("r", [-1e6, -3e4, -500.0, -21.0, -20.0, -19.5,
                               -8.0, -2.0, 0.0, 1.0, 5.0, 30.0])
def test_core_against_mpmath(r):
    t, s, vhat = mp_core(r)
    assert utgd.inverse_mills(r) == pytest.approx(t, rel=5e-15)
    # the direct zone loses a few digits to cancellation just above the
    # series handover; 1e-10 is the honest envelope there
    assert utgd.normalized_variance(r) == pytest.approx(vhat, rel=1e-10)


def test_normalized_variance_at_zero():
    # half-normal: vhat = pi/2 - 1
    assert utgd.normalized_variance(0.0) == pytest.approx(
        math.pi / 2.0 - 1.0, rel=1e-15)


@given(st.floats(min_value=-1e5, max_value=35.0))
def test_variance_bound(r):
    vhat = utgd.normalized_variance(r)
    assert 0.0 < vhat < 1.0


def test_normalized_variance_monotone_decreasing():
    rs = [-50.0, -20.5, -20.0, -19.5, -4.0, 0.0, 4.0, 20.0]
    vals = [utgd.normalized_variance(r) for r in rs]
    assert vals == sorted(vals, reverse=True)


@pytest.mark.parametrize("r", [-100.0, -25.0, -5.0, 0.0, 3.0])
def test_dvhat_matches_finite_difference(r):
    h = 1e-6 * max(1.0, abs(r))
    fd = (utgd.normalized_variance(r + h)
          - utgd.normalized_variance(r - h)) / (2.0 * h)
    assert utgd.dnormalized_variance_dr(r) == pytest.approx(fd, rel=5e-6)


def test_dvar_asymptotes():
    # -2/r^3 on the right, 4/r^3 on the left
    r = 1024.0
    assert utgd.dvar_dr(1.0, r, 0.0) == pytest.approx(-2.0 / r ** 3, rel=1e-3)
    assert utgd.dvar_dr(1.0, -r, 0.0) == pytest.approx(-4.0 / r ** 3, rel=1e-3)


class TestMeanAndForms:
    def test_mean_roundtrip(self):
        spec = TruncatedGaussianSpec(mu=-0.9408, sigma=2.8555, cutoff=-1.0)
        M = utgd.mean_from_params(spec)
        assert utgd.sigma_from_mean_r(M, spec.r, -1.0) == pytest.approx(
            2.8555, rel=1e-14)

    def test_right_side_mirror(self):
        left = TruncatedGaussianSpec(0.4, 1.7, -0.3, Side.LEFT)
        right = TruncatedGaussianSpec(-0.4 - 0.6, 1.7, -0.3, Side.RIGHT)
        ml = utgd.mean_from_params(left)
        mr = utgd.mean_from_params(right)
        assert ml - (-0.3) == pytest.approx((-0.3) - mr, rel=1e-14)

    @given(st.floats(min_value=-30.0, max_value=8.0),
           st.floats(min_value=0.05, max_value=20.0),
           st.floats(min_value=-3.0, max_value=3.0))
    @settings(max_examples=80)
    def test_form_congruence(self, r, sigma, a):
        mu = a + r * sigma
        M = utgd.mean_from_params(TruncatedGaussianSpec(mu, sigma, a))
        v1 = utgd.var_form1(sigma, r)
        v2 = utgd.var_form2(M, r, a)
        assert v2 == pytest.approx(v1, rel=1e-11)
        assert 0.0 < v2 < (M - a) ** 2

    def test_var_from_mu_sigma_warns_on_mismatch(self):
        spec = TruncatedGaussianSpec(0.2, 1.1, 0.0)
        M = utgd.mean_from_params(spec)
        assert utgd.var_from_mu_sigma(M, 0.2, 1.1, 0.0) == pytest.approx(
            utgd.var_form1(1.1, spec.r), rel=1e-12)
        with pytest.warns(RuntimeWarning):
            utgd.var_from_mu_sigma(M + 0.01, 0.2, 1.1, 0.0)


class TestShape:
    def test_half_normal_closed_forms(self):
        s, k, _, _ = utgd.skewness_kurtosis(1.0, 0.0, 0.0)
        want_s = math.sqrt(2.0) * (4.0 - math.pi) / (math.pi - 2.0) ** 1.5
        want_k = 3.0 + 8.0 * (math.pi - 3.0) / (math.pi - 2.0) ** 2
        assert s == pytest.approx(want_s, abs=1e-12)
        assert k == pytest.approx(want_k, abs=1e-12)

    def test_untruncated_limit(self):
        # cutoff far below the location: the parent Gaussian shape survives
        s, k, _, _ = utgd.skewness_kurtosis(1.0, 300.0, 0.0)
        assert s == pytest.approx(0.0, abs=1e-12)
        assert k == pytest.approx(3.0, abs=1e-12)

    def test_deep_truncation_limit(self):
        # cutoff far above the location: exponential-tail shape
        s, k, _, _ = utgd.skewness_kurtosis(1.0, -1e6, 0.0)
        assert s == pytest.approx(2.0, rel=1e-5)
        assert k == pytest.approx(9.0, rel=1e-5)

    @pytest.mark.parametrize("r", [-50.0, -11.0, -10.0, -9.5, -3.0, 0.0, 4.0])
    def test_against_mpmath_moments(self, r):
        with mpmath.workdps(50):
            r_ = mpmath.mpf(r)
            z0 = mpmath.erfc(-r_ / mpmath.sqrt(2)) / 2

            def raw(k):
                # standard parent, cutoff at -r so that (mu - a)/sigma = r
                return mpmath.quad(
                    lambda x: x ** k * mpmath.npdf(x) / z0, [-r_, mpmath.inf])

            m1, m2, m3, m4 = (raw(k) for k in (1, 2, 3, 4))
            var = m2 - m1 ** 2
            cm3 = m3 - 3 * m1 * m2 + 2 * m1 ** 3
            cm4 = m4 - 4 * m1 * m3 + 6 * m1 ** 2 * m2 - 3 * m1 ** 4
            want_s = float(cm3 / var ** 1.5)
            want_k = float(cm4 / var ** 2)
        # the reference frame is parent-centered, ours is cutoff-centered:
        # shift the raw moments to the truncated mean before normalizing
        s, k, _, _ = utgd.skewness_kurtosis(1.0 - r, r, -r)
        assert s == pytest.approx(want_s, rel=2e-8, abs=1e-10)
        assert k == pytest.approx(want_k, rel=2e-8)

    def test_right_side_flips_skewness(self):
        sl, kl, _, _ = utgd.skewness_kurtosis(1.0, 0.7, 0.0, Side.LEFT)
        # the mirrored spec keeps r = (mu - a)/sigma, which flips sign
        sr, kr, _, _ = utgd.skewness_kurtosis(-1.0, -0.7, 0.0, Side.RIGHT)
        assert sr == pytest.approx(-sl, rel=1e-14)
        assert kr == pytest.approx(kl, rel=1e-14)


def test_central_moments_56_vs_quadrature():
    sigma, r, a = 1.3, -0.4, 0.2
    mu = a + r * sigma
    spec = TruncatedGaussianSpec(mu, sigma, a)
    M = utgd.mean_from_params(spec)
    cm5, cm6 = utgd.central_moments_56(M, r, a)

    norm = math.erfc(-r / math.sqrt(2.0)) / 2.0

    def dens(x):
        z = (x - mu) / sigma
        return math.exp(-z * z / 2.0) / (sigma * math.sqrt(2 * math.pi) * norm)

    got5 = oracle.quad_moment(dens, (a, math.inf), k=5, center=M)
    got6 = oracle.quad_moment(dens, (a, math.inf), k=6, center=M)
    assert cm5 == pytest.approx(got5.value, rel=1e-10)
    assert cm6 == pytest.approx(got6.value, rel=1e-10)


class TestHeightAndDensity:
    def test_r_from_height_roundtrip(self):
        # boundary-to-mode density ratio exp(-r^2/2) inverts back to r
        for r in (0.0, 0.3, 2.0, 5.0):
            assert utgd.r_from_height(math.exp(-r * r / 2.0)) \
                == pytest.approx(r, abs=1e-12)
        with pytest.raises(ValueError):
            utgd.r_from_height(1.5)

    def test_density_normalizes(self):
        M, r, a = 1.2, -0.8, 0.1
        sigma = utgd.sigma_from_mean_r(M, r, a)
        norm = math.erfc(-r / math.sqrt(2.0)) / 2.0
        h = 1.0 / (sigma * math.sqrt(2.0 * math.pi) * norm)  # modal density
        est = oracle.quad_moment(
            lambda x: utgd.density(M, r, a, x, h), (a, math.inf), k=0)
        assert est.value == pytest.approx(1.0, rel=1e-11)

    def test_var_max_from_height(self):
        # boundary at full modal height means r = 0, i.e. the half-normal
        assert utgd.var_max_from_height(1.0, 0.0, 1.0) == pytest.approx(
            math.pi / 2.0 - 1.0, rel=1e-12)


def test_moment_summary_consistent():
    spec = TruncatedGaussianSpec(0.5, 1.4, -0.2)
    summ = utgd.moment_summary(spec)
    M = utgd.mean_from_params(spec)
    assert summ.mean == pytest.approx(M, rel=1e-14)
    assert summ.variance == pytest.approx(utgd.var_form1(1.4, spec.r), rel=1e-13)
    s, k, _, _ = utgd.skewness_kurtosis(M, spec.r, -0.2)
    assert summ.skewness == pytest.approx(s, rel=1e-13)
    assert summ.kurtosis == pytest.approx(k, rel=1e-13)
    cm5, cm6 = utgd.central_moments_56(M, spec.r, -0.2)
    assert summ.cm5 == pytest.approx(cm5, rel=1e-13)
    assert summ.cm6 == pytest.approx(cm6, rel=1e-13)


def test_spec_validation():
    with pytest.raises(ValueError):
        TruncatedGaussianSpec(0.0, -1.0, 0.0)
    with pytest.raises(ValueError):
        TruncatedGaussianSpec(0.0, 0.0, 0.0)
