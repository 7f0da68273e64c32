"""Moments of unilaterally truncated Gaussian and scaled chi distributions,
with calibration from target moments and an independent numeric oracle."""

from .calibrate import (
    APPROX1_SET_I,
    APPROX1_SET_II,
    ApproxFn1Params,
    CalibrationResult,
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
from .chi import (
    NVMX_DEFAULT_PARAMS,
    ChiKind,
    LimitDirection,
    NvmxFitParams,
    ScaledChiSpec,
    VmaxReport,
    chi_calibrate,
    chi_density,
    chi_limits,
    chi_raw_moment,
    chi_sigma_from_mean,
    chi_var_form1,
    chi_var_form2,
    nvmx_approx,
    nvmx_search,
    vmax_fixed_n,
    vmax_fixed_r_approx,
)
from .lognormal import (
    LognormalMoments,
    back_moments,
    calibrate_original,
    log_var_forms,
    log_xi,
    lognormal_slopes,
)
from .oracle import OracleEstimate, SampleSummary, quad_moment, sample_truncated
from .specfun import (
    exp_r2_half_xi,
    gamma_generalized,
    gamma_lower,
    gamma_upper,
    lambert_w0,
    log_gamma_upper,
    xi,
)
from .utgd import (
    MomentSummary,
    Side,
    TruncatedGaussianSpec,
    central_moments_56,
    density,
    dnormalized_variance_dr,
    dvar_dr,
    inverse_mills,
    mean_from_params,
    moment_summary,
    normalized_variance,
    r_from_height,
    sigma_from_mean_r,
    skewness_kurtosis,
    var_form1,
    var_form2,
    var_from_mu_sigma,
    var_max_from_height,
)

__version__ = "0.1.0"
