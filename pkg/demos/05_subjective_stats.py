"""The subjective-score toolchain on a simulated panel.

Simulates raters with planted outliers, screens them, aggregates MOS with
confidence intervals, evaluates a metric (logistic fit, correlations, the
two classification AUCs), runs the factorial ANOVA, and draws a balanced
stimulus subset.
"""

from collections import Counter

import numpy as np

from meshqa.stats import (
    ScoreMatrix,
    SelectionCandidate,
    anova_factorial,
    apply_logistic,
    fit_logistic,
    krasula_auc,
    mos_ci,
    plcc,
    screen_bt500,
    screen_golden,
    select_stimuli,
    srocc,
)
from meshqa.stats.anova import format_effect_table
from meshqa.stats.mos import MosRecord

rng = np.random.default_rng(0)

# --- 1. a rating panel with planted outliers ------------------------------------

n_stimuli = 40
true_quality = rng.uniform(1.2, 4.9, size=n_stimuli)
matrix = ScoreMatrix()
for p in range(22):
    for s in range(n_stimuli):
        vote = np.clip(round(true_quality[s] + rng.normal(0, 0.5)), 1, 5)
        matrix.votes.append((f"rater{p:02d}", f"s{s:02d}", int(vote)))
    matrix.golden[f"rater{p:02d}"] = {"poor": 1, "high": 5, "rep1": 4, "rep2": 4}
for s in range(n_stimuli):  # a contrarian mirrors the panel
    matrix.votes.append(("contrarian", f"s{s:02d}", int(np.clip(6 - round(true_quality[s]), 1, 5))))
matrix.golden["contrarian"] = {"poor": 1, "high": 5, "rep1": 4, "rep2": 4}
matrix.golden["sleeper"] = {"poor": 5, "high": 2, "rep1": 5, "rep2": 1}
for s in range(n_stimuli):
    matrix.votes.append(("sleeper", f"s{s:02d}", 3))

rejected = screen_bt500(matrix) | screen_golden(matrix)
print(f"screening rejected: {sorted(rejected)}")

# --- 2. MOS + confidence intervals -----------------------------------------------

records = []
for s in range(n_stimuli):
    votes = [v for p, sid, v in matrix.votes if sid == f"s{s:02d}" and p not in rejected]
    records.append(mos_ci(votes, f"s{s:02d}"))
avg_ci = np.mean([r.ci95 for r in records])
print(f"MOS over {records[0].n} kept raters; mean CI95 half-width {avg_ci:.3f}")

# --- 3. metric evaluation ------------------------------------------------------------

metric = true_quality + rng.normal(0, 0.35, size=n_stimuli)  # a decent metric
mos_values = np.array([r.mos for r in records])
params = fit_logistic(metric, mos_values)
mapped = apply_logistic(params, metric)
auc_ds, auc_bw = krasula_auc(records, metric)
print(f"plcc raw {plcc(metric, mos_values):.3f} -> after logistic {plcc(mapped, mos_values):.3f}")
print(f"srocc {srocc(metric, mos_values):.3f}, AUC_DS {auc_ds:.3f}, AUC_BW {auc_bw:.3f}")

# --- 4. factorial ANOVA with an interaction ---------------------------------------------

shape = (10, 5, 5, 5, 5)
lod_axis = np.linspace(0, 1, 10)
qp_axis = np.linspace(0, 1, 5)
response = np.broadcast_to(
    np.einsum("i,j->ij", lod_axis, qp_axis)[:, :, None, None, None], shape
).copy()
response += rng.normal(0, 0.01, size=shape)
effects = anova_factorial(response, ["lod", "qp", "qt", "ts", "tq"])
print("\n" + format_effect_table(effects[:7]) + "\n...")

# --- 5. balanced subset selection ----------------------------------------------------------

levels = dict(lod=range(1, 11), qp=(7, 8, 9, 10, 11), qt=(6, 7, 8, 9, 10),
              ts=(2048, 1440, 1024, 712, 512), tq=(90, 75, 50, 25, 10))
pool = [
    SelectionCandidate(
        f"c{i:04d}", float(rng.uniform(1, 5)), float(rng.uniform(1, 5)),
        f"m{rng.integers(8)}",
        tuple(list(v)[rng.integers(len(list(v)))] for v in levels.values()),
    )
    for i in range(2000)
]
chosen = select_stimuli(pool, 200, seed=1, dimension_names=list(levels))
by_model = Counter(c.model_id for c in chosen)
print(f"selected 200/2000: per-model counts {sorted(by_model.values())}")
