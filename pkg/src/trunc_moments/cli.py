"""Command-line interface.

Subcommands
-----------
calibrate-gauss   solve (mu, sigma) of a one-sided truncated Gaussian from
                  target mean/variance at a fixed cutoff
calibrate-chi     solve (r, sigma, cutoff) of a truncated scaled chi model
vmax              variance-maximizing dimension and peak variance at fixed |r|
fit               estimate sigma three ways from a raw data column and report
                  their divergence plus a histogram RMSE
table             regenerate the reference tables (TSV)
plot-data         emit plot-ready sweeps (TSV)

Exit codes: 0 success, 1 usage/IO error, 2 infeasible or degenerate model.
Calibration and fit output is JSON on stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import calibrate, chi, tables, utgd
from .calibrate import CalibrationResult, Method
from .chi import ChiKind, ScaledChiSpec
from .utgd import Side, TruncatedGaussianSpec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; we reserve 2 for infeasible targets
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_precision() -> int:
    env = os.environ.get("TRUNC_MOMENTS_PRECISION")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 8


def _rounded(obj, nd: int):
    if isinstance(obj, float):
        if math.isfinite(obj):
            return round(obj, nd)
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _rounded(v, nd) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v, nd) for v in obj]
    return obj


def _emit_json(payload: dict, nd: int) -> None:
    json.dump(_rounded(payload, nd), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _add_precision(p: argparse.ArgumentParser) -> None:
    p.add_argument("--precision", type=int, default=_default_precision(),
                   help="decimal places in numeric output (default 8, or "
                        "TRUNC_MOMENTS_PRECISION)")


# ---------------------------------------------------------------------------
# calibrate-gauss
# ---------------------------------------------------------------------------

def _approx_seed_mu(M: float, target_var: float, a: float) -> float:
    vhat = target_var / (M - a) ** 2
    if vhat >= calibrate.approx_switch_vhat():
        return a + calibrate.solve_U_approx1(vhat) * (M - a)
    return a + calibrate.solve_U_approx2(vhat) * (M - a)


def cmd_calibrate_gauss(args) -> int:
    M, v, a = args.mean, args.var, args.cutoff
    side = Side(args.side)
    # mirror a right-side problem onto the left-side solvers
    refl = side is Side.RIGHT
    M_l = 2.0 * a - M if refl else M
    d = M_l - a
    if not d > 0.0:
        lo = "above" if refl else "below"
        print(f"infeasible: the cutoff must lie strictly {lo} the target "
              f"mean", file=sys.stderr)
        return EXIT_INFEASIBLE
    if not 0.0 < v < d * d:
        print(f"infeasible: the variance of any such model is confined to "
              f"(0, (mean - cutoff)^2) = (0, {d * d:g}); got {v:g}",
              file=sys.stderr)
        return EXIT_INFEASIBLE

    method = Method(args.method) if args.method != "auto" else None
    mu1 = 2.0 * a - args.mu1 if (refl and args.mu1 is not None) else args.mu1
    mu2 = 2.0 * a - args.mu2 if (refl and args.mu2 is not None) else args.mu2
    try:
        if method is None:
            res = calibrate.calibrate_auto(M_l, v, a)
        elif method is Method.APPROX1:
            res = calibrate.calibrate_approx1(M_l, v, a)
        elif method is Method.APPROX2:
            res = calibrate.calibrate_approx2(M_l, v, a)
        elif method is Method.TWO_POINT:
            if mu1 is None:
                mu1 = _approx_seed_mu(M_l, v, a)
            if mu2 is None:
                mu2 = mu1 + 0.02 * d
            res = calibrate.two_point(M_l, v, a, mu1, mu2)
        elif method is Method.POINT_SLOPE:
            if mu1 is None:
                mu1 = _approx_seed_mu(M_l, v, a)
            res = calibrate.point_slope(M_l, v, a, mu1, rounds=args.rounds)
        else:
            parser_err = f"method {args.method!r} has no summary-statistics form"
            print(parser_err, file=sys.stderr)
            return EXIT_USAGE
    except ValueError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    mu = 2.0 * a - res.mu0 if refl else res.mu0
    mean = 2.0 * a - res.mean_achieved if refl else res.mean_achieved
    _emit_json({
        "mu": mu,
        "sigma": res.sigma0,
        "r": (mu - a) / res.sigma0,
        "side": side.value,
        "achieved_mean": mean,
        "achieved_var": res.var_achieved,
        "method": res.method.value,
        "seed_method": res.seed_method.value if res.seed_method else None,
        "iterations": res.iterations,
        "residuals": {"mean": res.mean_resid, "var": res.var_resid},
    }, args.precision)
    if max(res.mean_resid, res.var_resid) > 1e-8:
        print("warning: residuals exceed 1e-8 (approximate method or too "
              "few refinement rounds)", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


# ---------------------------------------------------------------------------
# calibrate-chi
# ---------------------------------------------------------------------------

def cmd_calibrate_chi(args) -> int:
    kind = ChiKind(args.trunc)
    M, v, n = args.mean, args.var, args.dim
    if kind is ChiKind.DOUBLE:
        if args.lower is None or args.upper is None:
            print("calibrate-chi: error: --trunc double requires --lower "
                  "and --upper", file=sys.stderr)
            return EXIT_USAGE
        return _calibrate_chi_double(args)
    try:
        r_abs, sigma, a = chi.chi_calibrate(M, v, n, kind)
    except ValueError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    spec = (ScaledChiSpec(sigma, n, lower=a, kind=kind) if kind is ChiKind.INNER
            else ScaledChiSpec(sigma, n, upper=a, kind=kind))
    mean = chi_mean = chi.chi_raw_moment(spec, 1)
    var = chi.chi_var_form1(spec)
    _emit_json({
        "r": r_abs,
        "sigma": sigma,
        "cutoff": a,
        "dim": n,
        "trunc": kind.value,
        "achieved_mean": mean,
        "achieved_var": var,
        "residuals": {"mean": abs(chi_mean - M) / M, "var": abs(var - v) / v},
    }, args.precision)
    return EXIT_OK


def _calibrate_chi_double(args) -> int:
    from scipy.optimize import brentq

    M, n, lo, up = args.mean, args.dim, args.lower, args.upper
    if not 0.0 <= lo < up:
        print("calibrate-chi: error: need 0 <= lower < upper", file=sys.stderr)
        return EXIT_USAGE
    if not lo < M < up:
        print(f"infeasible: the doubly truncated mean is confined to "
              f"({lo:g}, {up:g}); got {M:g}", file=sys.stderr)
        return EXIT_INFEASIBLE

    def mean_at(sigma: float) -> float:
        try:
            return chi.chi_raw_moment(
                ScaledChiSpec(sigma, n, lower=lo, upper=up,
                              kind=ChiKind.DOUBLE), 1)
        except ZeroDivisionError:
            # window mass underflows when sigma << lower; the conditional
            # mean collapses onto the lower edge in that limit
            return lo

    # the window pins the mean between its endpoints; bracket by expansion
    s_lo, s_hi = up * 1e-6, up
    while mean_at(s_hi) < M and s_hi < up * 1e12:
        s_hi *= 4.0
    try:
        sigma = float(brentq(lambda s: mean_at(s) - M, s_lo, s_hi,
                             xtol=1e-300, rtol=8.9e-16))
    except ValueError:
        print(f"infeasible: no sigma reproduces mean {M:g} on [{lo:g}, {up:g}] "
              f"at n={n:g}", file=sys.stderr)
        return EXIT_INFEASIBLE
    spec = ScaledChiSpec(sigma, n, lower=lo, upper=up, kind=ChiKind.DOUBLE)
    mean = chi.chi_raw_moment(spec, 1)
    var = chi.chi_var_form1(spec)
    _emit_json({
        "r": lo / sigma,
        "sigma": sigma,
        "cutoff": lo,
        "upper": up,
        "dim": n,
        "trunc": "double",
        "achieved_mean": mean,
        "achieved_var": var,
        "residuals": {"mean": abs(mean - M) / M,
                      "var": abs(var - args.var) / args.var},
    }, args.precision)
    return EXIT_OK


# ---------------------------------------------------------------------------
# vmax
# ---------------------------------------------------------------------------

def cmd_vmax(args) -> int:
    rep = chi.nvmx_search(args.mean, args.r)
    n_fit = chi.nvmx_approx(args.r)
    payload = {
        "r": args.r,
        "mean": args.mean,
        "n_vmx_real": rep.n_vmx_real,
        "n_vmx_int": rep.n_vmx_int,
        "vmax_real": rep.vmax_real,
        "vmax_int": rep.vmax_int,
        "n_vmx_fit": n_fit,
        "vmax_fit": chi.vmax_fixed_r_approx(args.r) * args.mean ** 2,
        "n_vmx": rep.n_vmx_int if args.integer_n else rep.n_vmx_real,
        "vmax": rep.vmax_int if args.integer_n else rep.vmax_real,
    }
    _emit_json(payload, args.precision)
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _read_column(path: str, selector: str) -> list[float]:
    """One numeric column from a UTF-8 CSV/whitespace file.

    '#' lines are comments; the column is picked by 1-based index or header
    name; any non-numeric data row is an error naming the line.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [(i + 1, ln.strip()) for i, ln in enumerate(fh)]
    rows = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    split = (lambda s: [c.strip() for c in s.split(",")]) \
        if "," in rows[0][1] else (lambda s: s.split())

    idx: int | None = None
    try:
        idx = int(selector) - 1
        if idx < 0:
            raise ValueError(f"column index must be >= 1, got {selector}")
    except ValueError as exc:
        if "column index" in str(exc):
            raise
    header = split(rows[0][1])
    if idx is None:
        if selector not in header:
            raise ValueError(f"{path}: no column named {selector!r} in header")
        idx = header.index(selector)
        rows = rows[1:]
    else:
        try:
            float(header[idx] if idx < len(header) else "")
        except (ValueError, IndexError):
            rows = rows[1:]  # header row present, skip it

    out = []
    for no, ln in rows:
        cells = split(ln)
        if idx >= len(cells):
            raise ValueError(f"{path}: line {no}: missing column {idx + 1}")
        try:
            out.append(float(cells[idx]))
        except ValueError:
            raise ValueError(
                f"{path}: line {no}: non-numeric value {cells[idx]!r}") from None
    return out


def _solve_scalar(f, lo: float, hi: float):
    """Root of f on an expanding log-spaced scan of [lo, hi]; None if no
    sign change shows up."""
    from scipy.optimize import brentq

    grid = np.geomspace(lo, hi, 200)
    vals = [f(g) for g in grid]
    for i in range(len(grid) - 1):
        va, vb = vals[i], vals[i + 1]
        if math.isnan(va) or math.isnan(vb):
            continue
        if va == 0.0:
            return float(grid[i])
        if va * vb < 0.0:
            return float(brentq(f, grid[i], grid[i + 1],
                                xtol=1e-300, rtol=8.9e-16))
    return None


def _fit_gauss(values: np.ndarray, a: float, warnings: list[str]):
    M = float(values.mean())
    v = float(values.var(ddof=1))
    d = M - a
    est = {"mean_based": None, "form1": None, "form2": None}
    if not d > 0.0:
        warnings.append("sample mean does not exceed the cutoff; no "
                        "left-truncated Gaussian fits")
        return M, v, est, None
    if v >= d * d:
        warnings.append(
            f"sample variance {v:g} exceeds the attainable bound "
            f"(mean - cutoff)^2 = {d * d:g}; model anomalous")
        return M, v, est, None
    auto = calibrate.calibrate_auto(M, v, a)
    mu0 = auto.mu0
    # three single-functional sigma estimates at the calibrated location
    est["mean_based"] = utgd.sigma_from_mean_r(M, 0.0, a) if mu0 == a else \
        _solve_scalar(
            lambda s: utgd.mean_from_params(TruncatedGaussianSpec(mu0, s, a)) - M,
            1e-6 * d, 1e3 * d)
    try:
        est["form1"] = calibrate.sigma_newton(v, mu0, a, M,
                                              calibrate.VarianceForm.I)
        est["form2"] = calibrate.sigma_newton(v, mu0, a, M,
                                              calibrate.VarianceForm.II)
    except ValueError as exc:
        warnings.append(str(exc))
    sigma = est["form2"] or est["form1"] or est["mean_based"]

    def model_density(x: float) -> float:
        if sigma is None:
            return 0.0
        spec = TruncatedGaussianSpec(mu0, sigma, a)
        mean = utgd.mean_from_params(spec)
        h = (math.sqrt(2.0 / math.pi) / sigma
             / math.erfc(-(mu0 - a) / sigma / math.sqrt(2.0)))
        return utgd.density(mean, spec.r, a, x, h)

    return M, v, est, model_density


def _fit_chi(values: np.ndarray, n: float, lo: float | None,
             up: float | None, warnings: list[str]):
    M = float(values.mean())
    v = float(values.var(ddof=1))
    if lo is not None and up is not None:
        kind, a1, a2 = ChiKind.DOUBLE, lo, up
    elif up is not None:
        kind, a1, a2 = ChiKind.OUTER, 0.0, up
    else:
        kind, a1, a2 = ChiKind.INNER, lo if lo is not None else 0.0, math.inf

    def spec(sigma: float) -> ScaledChiSpec:
        return ScaledChiSpec(sigma, n, lower=a1, upper=a2, kind=kind)

    est = {"mean_based": None, "form1": None, "form2": None}
    s_hi = max(M, a1, 0.0 if math.isinf(a2) else a2) * 1e3 + 1.0
    est["mean_based"] = _solve_scalar(
        lambda s: chi.chi_raw_moment(spec(s), 1) - M, M * 1e-6, s_hi)
    est["form1"] = _solve_scalar(
        lambda s: chi.chi_var_form1(spec(s)) - v, M * 1e-6, s_hi)
    implied_cutoff = None
    if kind is ChiKind.DOUBLE:
        warnings.append("Form II estimate is undefined for a two-sided window")
    else:
        try:
            _, s2, implied_cutoff = chi.chi_calibrate(M, v, n, kind)
            est["form2"] = s2
        except ValueError as exc:
            sup = chi.vmax_fixed_n(M, n) if (n > 0.0 or n < -2.0) else math.inf
            if kind is ChiKind.INNER and v < 1.05 * sup:
                # sampling noise can nudge the variance just past the
                # supremum (the untruncated limit); clamp instead of flagging
                est["form2"] = chi.chi_sigma_from_mean(M, 0.0, n, kind)
                implied_cutoff = 0.0
                warnings.append(
                    "sample variance sits at the attainable bound; Form II "
                    "estimate clamped to the untruncated limit")
            else:
                warnings.append(f"anomalous: {exc}")

    sigma = est["mean_based"] or est["form1"]

    def model_density(x: float) -> float:
        return chi.chi_density(spec(sigma), x) if sigma is not None else 0.0

    return M, v, est, model_density, implied_cutoff


def cmd_fit(args) -> int:
    try:
        data = _read_column(args.input, args.column)
    except OSError as exc:
        print(f"fit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"fit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    values = np.asarray(data, dtype=float)
    if args.lower is not None:
        values = values[values >= args.lower]
    if args.upper is not None:
        values = values[values <= args.upper]
    if values.size == 0:
        print("fit: the truncation window contains no data", file=sys.stderr)
        return EXIT_INFEASIBLE
    if values.size < 2:
        print("fit: need at least two rows for a variance", file=sys.stderr)
        return EXIT_INFEASIBLE

    warnings: list[str] = []
    refused = values.size < 30
    if refused:
        warnings.append(f"insufficient data: {values.size} rows in the "
                        "window (need 30); reporting sample moments only")

    implied_cutoff = None
    if args.model == "gauss":
        a = args.lower if args.lower is not None else float(values.min())
        if refused:
            M, v = float(values.mean()), float(values.var(ddof=1))
            est, model_density = \
                {"mean_based": None, "form1": None, "form2": None}, None
        else:
            M, v, est, model_density = _fit_gauss(values, a, warnings)
        window = {"lower": a, "upper": args.upper}
    else:
        if args.dim is None:
            print("fit: error: --model chi requires --dim", file=sys.stderr)
            return EXIT_USAGE
        if refused:
            M, v = float(values.mean()), float(values.var(ddof=1))
            est, model_density = \
                {"mean_based": None, "form1": None, "form2": None}, None
        else:
            M, v, est, model_density, implied_cutoff = _fit_chi(
                values, args.dim, args.lower, args.upper, warnings)
        window = {"lower": args.lower, "upper": args.upper}

    present = [s for s in est.values() if s is not None]
    divergence = (max(present) - min(present)) / min(present) \
        if len(present) >= 2 else None

    rmse = None
    if model_density is not None and any(est.values()):
        bins = args.bins if args.bins else "fd"
        hist, edges = np.histogram(values, bins=bins, density=True)
        centers = 0.5 * (edges[1:] + edges[:-1])
        model = np.array([model_density(c) for c in centers])
        # both curves integrate to 1 over the window by construction
        rmse = float(np.sqrt(np.mean((hist - model) ** 2)))

    _emit_json({
        "model": args.model,
        "dim": args.dim,
        "window": window,
        "count": int(values.size),
        "sample_mean": M,
        "sample_var": v,
        "sigma_estimates": est,
        "divergence": divergence,
        "implied_cutoff": implied_cutoff,
        "rmse_vs_data": rmse,
        "warnings": warnings,
    }, args.precision)
    return EXIT_OK


# ---------------------------------------------------------------------------
# table / plot-data
# ---------------------------------------------------------------------------

def cmd_table(args) -> int:
    try:
        rows = tables.build_table(args.name)
    except ValueError as exc:
        print(f"table: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write("\n".join(rows) + "\n")
    return EXIT_OK


def cmd_plot_data(args) -> int:
    try:
        rows = tables.plot_series(args.figure, args.min, args.max, args.step,
                                  args.precision)
    except ValueError as exc:
        print(f"plot-data: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write("\n".join(rows) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="trunc-moments",
                     description="moments and calibration of one-sided "
                                 "truncated Gaussian and scaled chi models")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("calibrate-gauss",
                       help="solve (mu, sigma) from mean/variance targets")
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--var", type=float, required=True)
    p.add_argument("--cutoff", type=float, required=True)
    p.add_argument("--side", choices=[s.value for s in Side], default="left")
    p.add_argument("--method", default="auto",
                   choices=["auto", "approx1", "approx2", "two-point",
                            "point-slope"])
    p.add_argument("--mu1", type=float, default=None)
    p.add_argument("--mu2", type=float, default=None)
    p.add_argument("--rounds", type=int, default=3)
    _add_precision(p)
    p.set_defaults(func=cmd_calibrate_gauss)

    p = sub.add_parser("calibrate-chi",
                       help="solve (r, sigma, cutoff) of a chi model")
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--var", type=float, required=True)
    p.add_argument("--dim", type=float, required=True)
    p.add_argument("--trunc", choices=[k.value for k in ChiKind],
                   default="inner")
    p.add_argument("--lower", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)
    _add_precision(p)
    p.set_defaults(func=cmd_calibrate_chi)

    p = sub.add_parser("vmax",
                       help="variance-maximizing dimension at fixed |r|")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--mean", type=float, default=1.0)
    p.add_argument("--integer-n", action="store_true")
    _add_precision(p)
    p.set_defaults(func=cmd_vmax)

    p = sub.add_parser("fit", help="fit a model to a raw data column")
    p.add_argument("--input", required=True)
    p.add_argument("--column", default="1",
                   help="1-based index or header name (default 1)")
    p.add_argument("--model", choices=["gauss", "chi"], required=True)
    p.add_argument("--dim", type=float, default=None)
    p.add_argument("--lower", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)
    p.add_argument("--bins", type=int, default=None,
                   help="histogram bin count (default Freedman-Diaconis)")
    p.add_argument("--seed", type=int, default=None,
                   help="accepted for interface stability; fitting is "
                        "deterministic")
    _add_precision(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("table", help="regenerate a reference table as TSV")
    p.add_argument("--name", required=True)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("plot-data", help="emit plot-ready sweep data as TSV")
    p.add_argument("--figure", required=True)
    p.add_argument("--min", type=float, default=None)
    p.add_argument("--max", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    _add_precision(p)
    p.set_defaults(func=cmd_plot_data)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
