"""Reference-table generation for the command line interface.

Each builder returns a list of tab-separated rows (header first) rendered
at a fixed precision, so the output can be frozen as golden files.
"""

from __future__ import annotations

import math

from . import chi, utgd
from .calibrate import dsigma1_dmu

__all__ = ["TABLE_NAMES", "build_table"]


def _f(x: float, nd: int = 5) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.{nd}f}"


def _mu_sigma_r() -> list[str]:
    rows = ["r\tsigma\tmu\tvar"]
    for r in (-2.0, -1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0):
        sigma = utgd.sigma_from_mean_r(1.0, r, 0.0)
        rows.append(f"{r:.2f}\t{_f(sigma)}\t{_f(r * sigma)}"
                    f"\t{_f(utgd.var_form2(1.0, r, 0.0))}")
    return rows


def _ndim_variance() -> list[str]:
    rows = ["n\tr\tsigma\ta\tvar"]
    for n in (-6.0, -3.0, -2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 6.0):
        for r in (-4.0, -2.0, -1.0, -0.5, 0.0):
            if r == 0.0:
                var, sigma, a = chi.chi_limits(n, chi.ChiKind.INNER, "r_to_0")
            else:
                sigma = chi.chi_sigma_from_mean(1.0, abs(r), n)
                a = abs(r) * sigma
                var = chi.chi_var_form2(1.0, abs(r), n)
            rows.append(f"{n:g}\t{r:.1f}\t{_f(sigma)}\t{_f(a)}\t{_f(var)}")
    return rows


def _limits() -> list[str]:
    rows = ["n\tkind\tdirection\tvar\tsigma\tcutoff"]
    for n in (1.0, 2.0, 3.0):
        for kind in (chi.ChiKind.OUTER, chi.ChiKind.INNER):
            for which in ("r_to_0", "r_to_inf"):
                var, sigma, a = chi.chi_limits(n, kind, which)
                rows.append(f"{n:g}\t{kind.value}\t{which}"
                            f"\t{_f(var, 8)}\t{_f(sigma, 8)}\t{_f(a, 8)}")
    return rows


def _slope_table() -> list[str]:
    rows = ["r\tdvar_dr\tvar"]
    ks = [float(2 ** k) for k in range(18, -1, -1)]
    grid = [-k for k in ks] + [-(2.0 ** k) for k in range(-1, -13, -1)]
    grid += [2.0 ** k for k in range(-12, 0)] + [float(2 ** k) for k in range(0, 18)]
    for r in grid:
        rows.append(f"{r:.17g}\t{utgd.dvar_dr(1.0, r, 0.0):.8e}"
                    f"\t{utgd.var_form2(1.0, r, 0.0):.8e}")
    return rows


TABLE_NAMES = {
    "mu-sigma-r": _mu_sigma_r,
    "ndim-variance": _ndim_variance,
    "limits": _limits,
    "slope-table": _slope_table,
}


def build_table(name: str) -> list[str]:
    try:
        builder = TABLE_NAMES[name]
    except KeyError:
        raise ValueError(
            f"unknown table {name!r}; choose from {sorted(TABLE_NAMES)}")
    return builder()


# -- plot-ready sweeps -------------------------------------------------------

def plot_series(figure: str, lo: float | None, hi: float | None,
                step: float | None, precision: int) -> list[str]:
    """Columnar data sufficient to re-plot the named figure."""

    def frange(a, b, s):
        out = []
        x = a
        while x <= b + 1e-12:
            out.append(round(x / s) * s if s < 1 else x)
            x += s
        return out

    p = precision
    if figure == "var-vs-r":
        a, b, s = lo if lo is not None else -5.0, hi if hi is not None else 5.0, step or 0.05
        rows = ["r\tvar"]
        rows += [f"{r:.{p}g}\t{utgd.var_form2(1.0, r, 0.0):.{p}f}"
                 for r in frange(a, b, s)]
        return rows
    if figure == "dvar-vs-r":
        a, b, s = lo if lo is not None else -5.0, hi if hi is not None else 5.0, step or 0.05
        rows = ["r\tdvar_dr"]
        rows += [f"{r:.{p}g}\t{utgd.dvar_dr(1.0, r, 0.0):.{p}f}"
                 for r in frange(a, b, s)]
        return rows
    if figure == "kurtosis":
        a, b, s = lo if lo is not None else -5.0, hi if hi is not None else 5.0, step or 0.05
        rows = ["r\tskewness\tkurtosis"]
        for r in frange(a, b, s):
            sk, ku, _, _ = utgd.skewness_kurtosis(1.0, r, 0.0)
            rows.append(f"{r:.{p}g}\t{sk:.{p}f}\t{ku:.{p}f}")
        return rows
    if figure == "slope-form1":
        a, b, s = lo if lo is not None else -5.0, hi if hi is not None else 5.0, step or 0.05
        rows = ["r\tdsigma1_dmu"]
        rows += [f"{r:.{p}g}\t{dsigma1_dmu(r):.{p}f}" for r in frange(a, b, s)]
        return rows
    if figure == "nvmx-vs-r":
        a, b, s = lo if lo is not None else 0.05, hi if hi is not None else 5.0, step or 0.05
        rows = ["r\tn_vmx_fit\tn_vmx_real\tvmax_real\tvmax_fit"]
        for r in frange(a, b, s):
            rep = chi.nvmx_search(1.0, r)
            rows.append(f"{r:.{p}g}\t{chi.nvmx_approx(r):.{p}f}"
                        f"\t{rep.n_vmx_real:.{p}f}\t{rep.vmax_real:.{p}f}"
                        f"\t{chi.vmax_fixed_r_approx(r):.{p}f}")
        return rows
    if figure == "vmax-vs-n":
        a, b, s = lo if lo is not None else 0.25, hi if hi is not None else 30.0, step or 0.25
        rows = ["n\tvmax"]
        rows += [f"{n:.{p}g}\t{chi.vmax_fixed_n(1.0, n):.{p}f}"
                 for n in frange(a, b, s)]
        return rows
    raise ValueError(
        f"unknown figure {figure!r}; choose from ['var-vs-r', 'dvar-vs-r', "
        "'kurtosis', 'slope-form1', 'nvmx-vs-r', 'vmax-vs-n']")
