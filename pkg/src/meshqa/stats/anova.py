"""Fixed-effects factorial ANOVA with a pooled high-order error term.

One response per cell (no replicates), so the error pools every interaction
of order three and higher; main effects and all pairwise interactions are
reported against it.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import f as f_dist

from ..errors import IncompleteFactorial


@dataclass
class EffectRow:
    name: str
    ss: float
    df: int
    f: float
    p: float


def anova_factorial(values, factor_names=None):
    """values: ndarray with one axis per factor, exactly one response per cell."""
    y = np.asarray(values, dtype=np.float64)
    if factor_names is None:
        factor_names = [f"factor{i}" for i in range(y.ndim)]
    if y.ndim != len(factor_names):
        raise IncompleteFactorial(
            f"{len(factor_names)} factors declared but responses have {y.ndim} axes"
        )
    if y.ndim < 3:
        raise IncompleteFactorial("pooled-error ANOVA needs at least 3 factors")
    if not np.isfinite(y).all():
        raise IncompleteFactorial("factorial has missing or non-finite cells")
    if min(y.shape) < 2:
        raise IncompleteFactorial("every factor needs at least 2 levels")

    n_total = y.size
    grand = y.mean()
    ss_total = float(((y - grand) ** 2).sum())
    df_total = n_total - 1

    axes = tuple(range(y.ndim))
    main_means = {}
    rows = []
    ss_accounted = 0.0
    df_accounted = 0

    for ax in axes:
        others = tuple(a for a in axes if a != ax)
        m = y.mean(axis=others)
        main_means[ax] = m
        reps = n_total / y.shape[ax]
        ss = float(reps * ((m - grand) ** 2).sum())
        df = y.shape[ax] - 1
        rows.append([factor_names[ax], ss, df])
        ss_accounted += ss
        df_accounted += df

    for ax_a, ax_b in combinations(axes, 2):
        others = tuple(a for a in axes if a not in (ax_a, ax_b))
        cell = y.mean(axis=others)  # shape (n_a, n_b) in axis order
        ma = main_means[ax_a][:, None]
        mb = main_means[ax_b][None, :]
        reps = n_total / (y.shape[ax_a] * y.shape[ax_b])
        ss = float(reps * ((cell - ma - mb + grand) ** 2).sum())
        df = (y.shape[ax_a] - 1) * (y.shape[ax_b] - 1)
        rows.append([f"{factor_names[ax_a]}x{factor_names[ax_b]}", ss, df])
        ss_accounted += ss
        df_accounted += df

    ss_error = max(ss_total - ss_accounted, 0.0)
    df_error = df_total - df_accounted
    if df_error <= 0:
        raise IncompleteFactorial("no degrees of freedom left for the error term")
    ms_error = ss_error / df_error

    effects = []
    for name, ss, df in rows:
        if ss <= 0.0:
            effects.append(EffectRow(name, ss, df, 0.0, 1.0))
            continue
        if ms_error == 0.0:
            effects.append(EffectRow(name, ss, df, float("inf"), 0.0))
            continue
        f_stat = (ss / df) / ms_error
        p = float(f_dist.sf(f_stat, df, df_error))
        effects.append(EffectRow(name, ss, df, float(f_stat), p))
    effects.append(EffectRow("error", ss_error, df_error, float("nan"), float("nan")))
    return effects


def format_effect_table(effects):
    lines = [f"{'effect':<16}{'SS':>14}{'df':>7}{'F':>12}{'p':>12}"]
    for row in effects:
        f_txt = f"{row.f:.4f}" if np.isfinite(row.f) else ("inf" if row.f > 0 else "")
        p_txt = f"{row.p:.3e}" if np.isfinite(row.p) else ""
        lines.append(f"{row.name:<16}{row.ss:>14.4f}{row.df:>7}{f_txt:>12}{p_txt:>12}")
    return "\n".join(lines)
