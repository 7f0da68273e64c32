"""Moments of a unilaterally truncated Gaussian distribution.

A Gaussian with location ``mu`` and spread ``sigma`` is truncated at a
boundary ``a``, keeping either the upper tail (support x >= a) or the
lower tail (x <= a).  Everything here is parameterized by the normalized
offset ``r = (mu - a) / sigma``; the retained-mass mean M, the variance
(in two algebraically equivalent forms), skewness/kurtosis and higher
central moments are all smooth functions of r.

Numerically the module works with three scaled quantities::

    t = sqrt(2/pi) / exp_r2_half_xi(r)      # inverse Mills ratio
    s = r + t                               # so  M = a + sigma*s
    Q = 1 - r*t - t**2                      # so  Var = sigma**2 * Q

The direct expressions cancel catastrophically for r << 0 (t -> -r, Q ->
O(1/r**2)), so below ``_SERIES_CUT`` everything switches to rational
functions of u = 1/r**2 whose integer coefficients are generated exactly
at import time from the double-factorial tail expansion of the Mills
ratio.  The two zones agree to ~1e-11 relative at the cut.

Right-sided truncation is handled by reflection: x -> 2a - x maps a
lower-tail distribution at offset r onto an upper-tail one at -r, flipping
the sign of odd central moments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .specfun import exp_r2_half_xi

__all__ = [
    "Side",
    "TruncatedGaussianSpec",
    "MomentSummary",
    "mean_from_params",
    "sigma_from_mean_r",
    "var_form1",
    "var_form2",
    "var_from_mu_sigma",
    "r_from_height",
    "var_max_from_height",
    "skewness_kurtosis",
    "central_moments_56",
    "density",
    "dvar_dr",
    "moment_summary",
    "inverse_mills",
    "normalized_variance",
    "dnormalized_variance_dr",
]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# Below this the direct t/s/Q route loses more than ~1e-11 relative and the
# asymptotic series in u = 1/r**2 takes over.
_SERIES_CUT = -20.0


class Side(str, Enum):
    """Which tail of the Gaussian is retained."""

    LEFT = "left"    # truncated from the left: support x >= a
    RIGHT = "right"  # truncated from the right: support x <= a


@dataclass(frozen=True)
class TruncatedGaussianSpec:
    """Parent-Gaussian parameterization of a truncated distribution."""

    mu: float
    sigma: float
    cutoff: float
    side: Side = Side.LEFT

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        for name in ("mu", "sigma", "cutoff"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def r(self) -> float:
        return (self.mu - self.cutoff) / self.sigma


@dataclass(frozen=True)
class MomentSummary:
    """Mean, low raw moments and shape measures of a truncated Gaussian."""

    mean: float
    m2: float
    m3: float
    m4: float
    variance: float
    skewness: float
    kurtosis: float
    cm5: float
    cm6: float


# ---------------------------------------------------------------------------
# asymptotic-series coefficients (exact integers, ascending powers of u)
# ---------------------------------------------------------------------------

def _series_coefficients(order: int):
    # psi(u) = sum_k (-1)^k (2k-1)!! u^k is the alternating tail expansion of
    # the Mills ratio scaled so that t = -r / psi(1/r**2) for r << 0.
    psi = [1]
    for k in range(1, order + 1):
        psi.append(-psi[-1] * (2 * k - 1))
    # phi(u) = (1 - psi(u)) / u, exact because psi(0) = 1
    phi = [-c for c in psi[1:]]

    def polymul(p, q):
        out = [0] * (len(p) + len(q) - 1)
        for i, pi in enumerate(p):
            for j, qj in enumerate(q):
                out[i + j] += pi * qj
        return out

    def polyadd(*ps):
        n = max(len(p) for p in ps)
        return [sum(p[i] for p in ps if i < len(p)) for i in range(n)]

    def shift(p, k):
        return [0] * k + p

    psi2 = polymul(psi, psi)
    phi2 = polymul(phi, phi)
    # vhat = (psi**2 - phi) / (u * phi**2) = N(u) / D(u)
    num = polyadd(psi2, [-c for c in phi])
    assert num[0] == 0
    n_coef = num[1:]
    d_coef = phi2

    # skewness numerator: ((phi-1) + u*phi*(phi+2) - u**2*phi**2) / u**2;
    # the leading u**0 and u**1 coefficients cancel exactly
    phi_plus2 = [phi[0] + 2] + phi[1:]
    pser = polyadd(shift(phi[1:], 1), shift(polymul(phi, phi_plus2), 1),
                   [-c for c in shift(phi2, 2)])
    assert pser[0] == 0 and pser[1] == 0
    s_coef = pser[2:]

    # excess-kurtosis numerator: (-(1-3u)psi**3 + (7-4u)psi**2 - 12psi + 6)/u**4
    psi3 = polymul(psi2, psi)
    pk = polyadd(polymul([-1, 3], psi3), polymul([7, -4], psi2),
                 [-12 * c for c in psi], [6])
    assert pk[:4] == [0, 0, 0, 0]
    k_coef = pk[4:]

    return psi, phi, n_coef, d_coef, s_coef, k_coef


(_PSI, _PHI, _VHAT_NUM, _VHAT_DEN,
 _SKEW_NUM, _KURT_NUM) = _series_coefficients(16)


def _polyval(coef_ascending, u: float) -> float:
    acc = 0.0
    for c in reversed(coef_ascending):
        acc = acc * u + c
    return acc


def _polyder(coef_ascending):
    return [k * c for k, c in enumerate(coef_ascending)][1:]


_VHAT_NUM_D = _polyder(_VHAT_NUM)
_VHAT_DEN_D = _polyder(_VHAT_DEN)


# ---------------------------------------------------------------------------
# core scaled quantities
# ---------------------------------------------------------------------------

def _core(r: float) -> tuple[float, float, float]:
    """Return (t, s, Q) at offset r, picking the numerically safe zone."""
    if math.isnan(r):
        return math.nan, math.nan, math.nan
    if r > _SERIES_CUT:
        with np.errstate(over="ignore"):
            e = float(exp_r2_half_xi(r))
        t = _SQRT_2_OVER_PI / e  # underflows to 0 for r > ~38; correct limit
        return t, r + t, 1.0 - r * t - t * t
    u = 1.0 / (r * r)
    psi = _polyval(_PSI, u)
    phi = _polyval(_PHI, u)
    t = -r / psi
    s = -r * u * phi / psi
    q = 1.0 - phi / (psi * psi)
    return t, s, q


def inverse_mills(r: float) -> float:
    """Hazard-rate factor t(r); the truncated mean is a + sigma*(r + t)."""
    return _core(r)[0]


def normalized_variance(r: float) -> float:
    """Variance divided by (M - a)**2; depends on r only."""
    if math.isnan(r):
        return math.nan
    if r > _SERIES_CUT:
        t, s, q = _core(r)
        return q / (s * s)
    u = 1.0 / (r * r)
    return _polyval(_VHAT_NUM, u) / _polyval(_VHAT_DEN, u)


def dnormalized_variance_dr(r: float) -> float:
    """d/dr of ``normalized_variance``; negative everywhere."""
    if math.isnan(r):
        return math.nan
    if r > _SERIES_CUT:
        t, s, q = _core(r)
        # exact reduction of d(Q/s**2)/dr via t' = -t*s, Q' = t*(s**2 - Q)
        return t + q * (t * s - 2.0) / (s * s * s)
    u = 1.0 / (r * r)
    n = _polyval(_VHAT_NUM, u)
    d = _polyval(_VHAT_DEN, u)
    dn = _polyval(_VHAT_NUM_D, u)
    dd = _polyval(_VHAT_DEN_D, u)
    return (-2.0 / r ** 3) * (dn * d - n * dd) / (d * d)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def mean_from_params(spec: TruncatedGaussianSpec) -> float:
    """Mean of the retained mass."""
    r = spec.r
    if spec.side is Side.RIGHT:
        return spec.cutoff - spec.sigma * _core(-r)[1]
    return spec.cutoff + spec.sigma * _core(r)[1]


def sigma_from_mean_r(M: float, r: float, a: float,
                      side: Side = Side.LEFT) -> float:
    """Parent spread that produces truncated mean M at offset r."""
    side = Side(side)
    if side is Side.LEFT:
        if not M > a:
            raise ValueError("left truncation requires M > a")
        return (M - a) / _core(r)[1]
    if not M < a:
        raise ValueError("right truncation requires M < a")
    return (a - M) / _core(-r)[1]


def var_form1(sigma: float, r: float) -> float:
    """Variance from (sigma, r) -- the 'parent spread' form."""
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    return sigma * sigma * _core(r)[2]


def var_form2(M: float, r: float, a: float, side: Side = Side.LEFT) -> float:
    """Variance from (M, r, a) -- the 'truncated mean' form."""
    if M == a:
        raise ValueError("M must differ from the cutoff")
    if Side(side) is Side.RIGHT:
        r = -r
    d = M - a
    return d * d * normalized_variance(r)


def var_from_mu_sigma(M: float, mu: float, sigma: float, a: float) -> float:
    """Variance via the congruent-manifold identity.

    Valid only when (mu, sigma, a) actually reproduce the truncated mean M;
    the moment-intersecting calibrators evaluate it off-manifold on purpose,
    so an inconsistency only warns.
    """
    m_implied = mean_from_params(TruncatedGaussianSpec(mu, sigma, a))
    if abs(m_implied - M) > 1e-8 * max(abs(M), 1e-300):
        warnings.warn(
            f"parameters not congruent: implied mean {m_implied!r} vs M={M!r}",
            RuntimeWarning, stacklevel=2)
    d = M - a
    return sigma * sigma + d * (mu - a) - d * d


def r_from_height(H: float) -> float:
    """Positive offset at which the density at the cutoff, relative to the
    mode, equals H."""
    if not 0.0 < H <= 1.0:
        raise ValueError(f"relative boundary height must be in (0, 1], got {H}")
    return math.sqrt(2.0 * math.log(1.0 / H))

def var_max_from_height(M: float, a: float, H: float) -> float:
    """Largest attainable variance when the density at the cutoff is at most
    H times the modal density (positive-offset branch)."""
    if not M > a:
        raise ValueError("requires M > a")
    d = M - a
    return d * d * normalized_variance(r_from_height(H))


def skewness_kurtosis(M: float, r: float, a: float,
                      side: Side = Side.LEFT) -> tuple[float, float, float, float]:
    """Return (S, K, S_un, K_un): normalized and unnormalized skewness and
    kurtosis.  The normalized pair depend on r (and side) only."""
    if M == a:
        raise ValueError("M must differ from the cutoff")
    sign = 1.0
    if Side(side) is Side.RIGHT:
        r = -r
        sign = -1.0
    # the shape measures cancel harder than the variance, so they leave the
    # direct zone earlier (both routes agree to ~1e-8 at the crossover)
    if r > -10.0:
        t, s, q = _core(r)
        p3 = r * r - 1.0 + 3.0 * r * t + 2.0 * t * t
        skew = t * p3 / q ** 1.5
        inner = (r * (r * r - 3.0) * t + (7.0 * r * r - 4.0) * t * t
                 + 12.0 * r * t ** 3 + 6.0 * t ** 4)
        kurt = 3.0 - inner / (q * q)
    else:
        # same expressions pushed through the u = 1/r**2 series; the integer
        # polynomial algebra removes the leading-order cancellations
        u = 1.0 / (r * r)
        phi = _polyval(_PHI, u)
        vh = _polyval(_VHAT_NUM, u) / _polyval(_VHAT_DEN, u)
        skew = _polyval(_SKEW_NUM, u) / (phi ** 3 * vh ** 1.5)
        kurt = 3.0 - _polyval(_KURT_NUM, u) / (phi ** 4 * vh * vh)
    var = var_form2(M, r, a)
    return sign * skew, kurt, sign * skew * var ** 1.5, kurt * var * var


def _centered_l(r: float, t: float, kmax: int) -> list[float]:
    # l_k = E[((X - mu)/sigma)^k]; recurrence l_k = (-r)^(k-1) t + (k-1) l_{k-2}
    ell = [1.0, t]
    for k in range(2, kmax + 1):
        ell.append((-r) ** (k - 1) * t + (k - 1) * ell[k - 2])
    return ell


def central_moments_56(M: float, r: float, a: float,
                       side: Side = Side.LEFT) -> tuple[float, float]:
    """Unnormalized 5th and 6th central moments."""
    if M == a:
        raise ValueError("M must differ from the cutoff")
    sign = 1.0
    if Side(side) is Side.RIGHT:
        r = -r
        sign = -1.0
    t, s, _ = _core(r)
    sigma = abs(M - a) / s
    ell = _centered_l(r, t, 6)
    # shift from parent-mean-centered to truncated-mean-centered:
    # (M - mu)/sigma = t
    cm5 = sum(math.comb(5, j) * ell[j] * (-t) ** (5 - j) for j in range(6))
    cm6 = sum(math.comb(6, j) * ell[j] * (-t) ** (6 - j) for j in range(7))
    return sign * cm5 * sigma ** 5, cm6 * sigma ** 6


def density(M: float, r: float, a: float, x: float, height: float,
            side: Side = Side.LEFT) -> float:
    """Density at x of the truncated distribution with modal density
    ``height``, parameterized by (M, r, a) instead of (mu, sigma)."""
    if not height > 0.0:
        raise ValueError("modal height must be positive")
    if Side(side) is Side.RIGHT:
        return density(2.0 * a - M, r, a, 2.0 * a - x, height)
    if not M > a:
        raise ValueError("left truncation requires M > a")
    if x < a:
        return 0.0
    t, _, _ = _core(r)
    z = (r * (x - M) + t * (x - a)) / (M - a)
    return height * math.exp(-0.5 * z * z)


def dvar_dr(M: float, r: float, a: float) -> float:
    """Derivative of the variance with respect to r at fixed (M, a)."""
    if M == a:
        raise ValueError("M must differ from the cutoff")
    d = M - a
    return d * d * dnormalized_variance_dr(r)


def moment_summary(spec: TruncatedGaussianSpec) -> MomentSummary:
    """All housed moments of a truncated Gaussian in one pass."""
    side = spec.side
    r = spec.r if side is Side.LEFT else -spec.r
    t, s, _ = _core(r)
    a_eff = spec.cutoff
    mu_eff = spec.mu if side is Side.LEFT else 2.0 * a_eff - spec.mu
    mean_left = a_eff + spec.sigma * s
    ell = _centered_l(r, t, 4)
    raw = [
        sum(math.comb(k, j) * spec.sigma ** j * ell[j] * mu_eff ** (k - j)
            for j in range(k + 1))
        for k in (1, 2, 3, 4)
    ]
    if side is Side.RIGHT:
        # X = 2a - X'; push the reflection through the raw moments
        c = 2.0 * a_eff
        m1, m2, m3, m4 = raw
        raw = [
            c - m1,
            c * c - 2.0 * c * m1 + m2,
            c ** 3 - 3.0 * c * c * m1 + 3.0 * c * m2 - m3,
            c ** 4 - 4.0 * c ** 3 * m1 + 6.0 * c * c * m2 - 4.0 * c * m3 + m4,
        ]
        mean = c - mean_left
    else:
        mean = mean_left
    var = var_form1(spec.sigma, r)
    # normalized S and K depend on r alone, so any M > a works here
    skew, kurt, _, _ = skewness_kurtosis(a_eff + 1.0, r, a_eff)
    if side is Side.RIGHT:
        skew = -skew
    cm5, cm6 = central_moments_56(mean, spec.r, a_eff, side=side)
    return MomentSummary(mean=mean, m2=raw[1], m3=raw[2], m4=raw[3],
                         variance=var, skewness=skew, kurtosis=kurt,
                         cm5=cm5, cm6=cm6)
