"""Classification-ability analysis of a metric against subjective scores.

Every unordered stimulus pair is labeled Different or Similar by a two-sample
z-test on the MOS difference at 95%. Two areas under the ROC curve follow:
how well |metric difference| separates Different from Similar pairs, and how
well the signed difference picks the subjectively better stimulus among the
Different pairs. The metric is read as a predicted quality: higher = better.
"""

from itertools import combinations

import numpy as np
from scipy.stats import t as t_dist

from ..errors import NoSignificantPairs, NoSimilarPairs

Z_95 = 1.959963984540054


def _standard_error(record):
    if record.n <= 1 or record.ci95 == 0.0:
        return 0.0
    return record.ci95 / t_dist.ppf(0.975, record.n - 1)


def _rank_auc(positives, negatives):
    """Mann-Whitney AUC with average-tie ranks."""
    pos = np.asarray(positives, dtype=np.float64)
    neg = np.asarray(negatives, dtype=np.float64)
    combined = np.concatenate([pos, neg])
    order = np.argsort(combined, kind="stable")
    ranks = np.empty(len(combined))
    sorted_vals = combined[order]
    i = 0
    while i < len(combined):
        j = i
        while j + 1 < len(combined) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    r_pos = ranks[: len(pos)].sum()
    u = r_pos - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def krasula_auc(mos_records, metric_values, z_threshold=Z_95):
    """(AUC_DS, AUC_BW) for a metric on CI-annotated subjective records.

    metric_values aligns with mos_records. Raises NoSignificantPairs when no
    pair differs significantly and NoSimilarPairs when every pair does.
    """
    if len(mos_records) != len(metric_values):
        raise ValueError("need one metric value per subjective record")
    if len(mos_records) < 2:
        raise NoSignificantPairs("need at least two stimuli")
    metric = np.asarray(metric_values, dtype=np.float64)

    different = []  # signed metric delta, better minus worse
    similar = []  # |metric delta|
    for i, j in combinations(range(len(mos_records)), 2):
        a, b = mos_records[i], mos_records[j]
        se = np.hypot(_standard_error(a), _standard_error(b))
        delta_mos = a.mos - b.mos
        if se == 0.0:
            significant = delta_mos != 0.0
        else:
            significant = abs(delta_mos) / se > z_threshold
        delta_metric = metric[i] - metric[j]
        if significant:
            oriented = delta_metric if delta_mos > 0 else -delta_metric
            different.append(oriented)
        else:
            similar.append(abs(delta_metric))

    if not different:
        raise NoSignificantPairs("every pair is statistically similar")
    if not similar:
        raise NoSimilarPairs("every pair is statistically different")

    auc_ds = _rank_auc(np.abs(different), similar)
    oriented = np.asarray(different)
    auc_bw = _rank_auc(oriented, -oriented)
    return auc_ds, auc_bw
