"""Correlation measures and the 4-parameter logistic mapping."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..errors import DegenerateFit, ZeroVariance


def _validated(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-D arrays of equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    if x.std() == 0.0 or y.std() == 0.0:
        raise ZeroVariance("an input has no variance")
    return x, y


def plcc(x, y):
    """Pearson linear correlation."""
    x, y = _validated(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    return float((xc @ yc) / np.sqrt((xc @ xc) * (yc @ yc)))


def _ranks_average_ties(values):
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average of ranks i+1..j+1
        i = j + 1
    return ranks


def srocc(x, y):
    """Spearman rank-order correlation: Pearson on average-ties ranks."""
    x, y = _validated(x, y)
    return plcc(_ranks_average_ties(x), _ranks_average_ties(y))


@dataclass
class LogisticParams:
    beta1: float
    beta2: float
    beta3: float
    beta4: float

    def __post_init__(self):
        if self.beta4 == 0.0:
            raise ValueError("beta4 must be nonzero")


def apply_logistic(params, metric):
    metric = np.asarray(metric, dtype=np.float64)
    z = -(metric - params.beta3) / abs(params.beta4)
    return params.beta2 + (params.beta1 - params.beta2) / (1.0 + np.exp(z))


def fit_logistic(metric_values, mos_values, restarts=10, seed=0):
    """Least-squares fit of the 4-parameter logistic by simplex search.

    Starts at beta1=max(mos), beta2=min(mos), beta3=median(metric),
    beta4=std(metric); the extra restarts jitter beta3/beta4 and the best
    SSE wins.
    """
    m = np.asarray(metric_values, dtype=np.float64)
    q = np.asarray(mos_values, dtype=np.float64)
    if m.shape != q.shape or m.ndim != 1:
        raise ValueError("inputs must be 1-D arrays of equal length")
    if len(m) < 8:
        raise ValueError("need at least 8 points for a stable fit")
    spread = m.std()
    if spread == 0.0:
        raise DegenerateFit("metric values are constant")

    def sse(theta):
        b1, b2, b3, b4 = theta
        z = -(m - b3) / max(abs(b4), 1e-12)
        pred = b2 + (b1 - b2) / (1.0 + np.exp(np.clip(z, -500, 500)))
        return float(((pred - q) ** 2).sum())

    base = np.array([q.max(), q.min(), np.median(m), spread])
    rng = np.random.default_rng(seed)
    best = None
    for trial in range(max(1, restarts)):
        start = base.copy()
        if trial:
            start[2] += rng.normal(0.0, spread)
            start[3] *= float(np.exp(rng.normal(0.0, 0.7)))
        result = minimize(sse, start, method="Nelder-Mead",
                          options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-12})
        if best is None or result.fun < best.fun:
            best = result
    b1, b2, b3, b4 = best.x
    if b4 == 0.0:
        b4 = 1e-12
    return LogisticParams(float(b1), float(b2), float(b3), float(abs(b4)))
