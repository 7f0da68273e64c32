"""Back-transformed moments for log-transformed data.

When a truncated Gaussian with parameters (mu, sigma, a) models X = ln(Y),
the mean and variance of the original variable Y (supported on y > e^a) are
exponential-tilt integrals of the truncated normal density.  They reduce to
ratios of the tail-mass function xi at shifted arguments::

    E[Y]    = exp(sigma**2/2 + mu) * xi(r + sigma)  / xi(r)
    E[Y**2] = exp(2*sigma**2 + 2*mu) * xi(r + 2*sigma) / xi(r)

with r = (mu - a)/sigma.  All xi ratios are evaluated in log space (via
``log_xi``) so that census-scale parameters do not overflow, and the
variance is assembled with expm1/log1p to survive the near-cancellation
when sigma is small.

``calibrate_original`` runs the point-slope intersection scheme on the LOG
of the two variance forms, which keeps the level curves well conditioned
when Var(Y) spans many orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .calibrate import CalibrationResult, Method
from .specfun import exp_r2_half_xi, xi
from .utgd import _core

__all__ = [
    "LognormalMoments",
    "log_xi",
    "back_moments",
    "log_var_forms",
    "lognormal_slopes",
    "calibrate_original",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LognormalMoments:
    mean_y: float
    var_y: float
    log_var_y: float


def log_xi(z: float) -> float:
    """ln(xi(z)), stable into the deep left tail where xi underflows."""
    if z >= -1.0:
        return math.log(float(xi(z)))
    return -0.5 * z * z + math.log(float(exp_r2_half_xi(z)))


def _log_mean_y(mu: float, sigma: float, r: float) -> float:
    return 0.5 * sigma * sigma + mu + log_xi(r + sigma) - log_xi(r)


def back_moments(mu: float, sigma: float, a: float) -> LognormalMoments:
    """Mean and variance of Y = e^X for X truncated-Gaussian."""
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    r = (mu - a) / sigma
    lm = _log_mean_y(mu, sigma, r)
    lv = _log_var_form1(mu, sigma, r)
    if lm > 700.0 or lv > 1400.0:
        raise OverflowError("back-transformed moments exceed float range")
    return LognormalMoments(mean_y=math.exp(lm), var_y=math.exp(lv),
                            log_var_y=lv)


def _log_var_form1(mu: float, sigma: float, r: float) -> float:
    lx0 = log_xi(r)
    lx1 = log_xi(r + sigma)
    lx2 = log_xi(r + 2.0 * sigma)
    s2 = sigma * sigma
    # Var = E[Y^2] - E[Y]^2, with the second-moment term factored out;
    # q -> 0- as sigma -> 0, so 1 - e^q goes through expm1
    q = -s2 + 2.0 * lx1 - lx2 - lx0
    if q > -1e-12:
        # the log-xi second difference is pure rounding noise here; use the
        # delta-method limit Var(y) ~ e^{2 mu} sigma**2 Q(r) instead
        q = -s2 * _core(r)[2]
    return 2.0 * s2 + 2.0 * mu + lx2 - lx0 + math.log(-math.expm1(q))


def _log_var_form2(mu: float, sigma: float, r: float, log_M_y: float) -> float:
    lx0 = log_xi(r)
    lx1 = log_xi(r + sigma)
    lx2 = log_xi(r + 2.0 * sigma)
    arg = -2.0 * mu + 2.0 * log_M_y + lx2 + 3.0 * lx0 - 4.0 * lx1
    # arg = log(1 + Var/M_y^2); near sigma -> 0 it sinks into rounding noise
    # of the log-xi differences, so switch to the delta-method limit there
    if abs(arg) < 1e-12:
        arg = sigma * sigma * _core(r)[2]
    elif arg < 0.0:
        raise ValueError(
            "the supplied mean admits no positive variance at these "
            "parameters (Form II)")
    return 2.0 * log_M_y + math.log(math.expm1(arg))


def log_var_forms(mu: float, sigma: float, a: float,
                  M_y: float | None = None) -> tuple[float, float]:
    """ln Var(Y) per Form I (no mean needed) and Form II (anchored to the
    supplied mean of Y; defaults to the congruent mean)."""
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    r = (mu - a) / sigma
    log_m = _log_mean_y(mu, sigma, r) if M_y is None else math.log(M_y)
    return _log_var_form1(mu, sigma, r), _log_var_form2(mu, sigma, r, log_m)


def lognormal_slopes(mu: float, sigma: float, a: float,
                     M_y: float) -> tuple[float, float]:
    """Slopes d(sigma)/d(mu) of the constant-Var(Y) level curves of the two
    log-variance forms."""
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    r = (mu - a) / sigma
    x0 = float(xi(r))
    x1 = float(xi(r + sigma))
    x2 = float(xi(r + 2.0 * sigma))
    s2 = sigma * sigma
    # sqrt(2*pi)*exp(r**2/2)*xi(r), through the scaled form to dodge overflow
    B = _SQRT_2PI * float(exp_r2_half_xi(r))

    num1 = (math.exp(s2) * (2.0 * math.exp(-sigma * (r + 1.5 * sigma)) * x1
                            - x2 - math.exp(-2.0 * sigma * (r + sigma)) * x0)
            + (x1 * x1 / x0 - math.exp(s2) * x2) * (sigma * B - 2.0))
    den1 = (2.0 * (r - sigma) * math.exp(-sigma * (r + 0.5 * sigma)) * x1
            + r * (math.exp(s2) * x2 - 2.0 * x1 * x1 / x0)
            + (2.0 * sigma - r) * math.exp(-sigma * (2.0 * r + sigma)) * x0
            + sigma * sigma * B / x0 * (2.0 * math.exp(s2) * x2 * x0 - x1 * x1))
    if den1 == 0.0:
        raise ZeroDivisionError("Form I slope denominator vanished")
    slope1 = num1 / den1

    # Form II: the anchor mean enters Var only through a multiplicative
    # constant, so it drops out of the derivative ratio -- M_y is accepted
    # for interface symmetry but does not influence the slope
    del M_y
    jfac = x1 * x2 / x0
    ea = math.exp(2.0 * sigma * (r + sigma))
    eb = math.exp(sigma * (r + 1.5 * sigma))
    num2 = (3.0 * jfac * ea + x1 - 4.0 * eb * x2
            - _SQRT_2PI * sigma * float(exp_r2_half_xi(r + 2.0 * sigma)) * x1)
    den2 = (3.0 * r * jfac * ea + (r - 2.0 * sigma) * x1
            - 4.0 * (r - sigma) * eb * x2)
    if den2 == 0.0:
        raise ZeroDivisionError("Form II slope denominator vanished")
    return slope1, num2 / den2


def _solve_sigma(log_var_at_sigma, target_log_var: float) -> float:
    """Bracket-and-bisect for sigma on one log-variance level curve.

    The curves are only defined where the expm1/log1p arguments stay in
    range, so the scan skips NaN cells instead of trusting a fixed bracket.
    """
    grid = [10.0 ** (-6.0 + 7.8 * i / 160.0) for i in range(161)]
    prev_s = prev_g = None
    for s in grid:
        try:
            g = log_var_at_sigma(s) - target_log_var
        except (ValueError, OverflowError):
            g = math.nan
        if math.isnan(g):
            prev_s = prev_g = None
            continue
        if prev_g is not None and g * prev_g <= 0.0:
            return float(brentq(
                lambda x: log_var_at_sigma(x) - target_log_var,
                prev_s, s, xtol=1e-300, rtol=8.9e-16))
        prev_s, prev_g = s, g
    raise ValueError("no sigma reproduces the target variance at this mu")


def calibrate_original(M_y: float, var_y: float, a: float, mu_seed: float,
                       rounds: int = 3) -> CalibrationResult:
    """Fit (mu, sigma) of the log-domain truncated Gaussian so that the
    back-transformed mean and variance match the ORIGINAL data.

    Runs the point-slope intersection on the log of the two variance forms
    (the raw variance is too steep in sigma for stable slopes when Var(Y)
    is large).
    """
    if not M_y > math.exp(a):
        raise ValueError("target mean must exceed e**cutoff")
    if not var_y > 0.0 or rounds < 1:
        raise ValueError("need var_y > 0 and rounds >= 1")
    target = math.log(var_y)
    mu = mu_seed
    mu0 = sigma0 = math.nan
    growth = 0
    gap_prev = math.inf
    for _ in range(rounds):
        s1 = _solve_sigma(
            lambda s: _log_var_form1(mu, s, (mu - a) / s), target)
        s2 = _solve_sigma(
            lambda s: _log_var_form2(mu, s, (mu - a) / s, math.log(M_y)),
            target)
        k1 = lognormal_slopes(mu, s1, a, M_y)[0]
        k2 = lognormal_slopes(mu, s2, a, M_y)[1]
        if k1 == k2:
            raise ValueError(f"tangents are parallel at mu={mu}")
        mu0 = mu + (s2 - s1) / (k1 - k2)
        sigma0 = s1 + k1 * (mu0 - mu)
        gap = abs(s2 - s1)
        growth = growth + 1 if gap > gap_prev else 0
        if growth >= 3:
            raise RuntimeError("point-slope iteration diverging")
        gap_prev = gap
        mu = mu0
    back = back_moments(mu0, sigma0, a)
    return CalibrationResult(
        mu0=mu0, sigma0=sigma0, method=Method.POINT_SLOPE, iterations=rounds,
        mean_resid=abs(back.mean_y - M_y) / M_y,
        var_resid=abs(back.var_y - var_y) / var_y,
        mean_achieved=back.mean_y, var_achieved=back.var_y)
