from .mos import MosRecord, ScoreMatrix, mos_ci, load_votes_jsonl, mos_table
from .screening import screen_bt500, screen_golden, stimulus_stats
from .correlation import LogisticParams, plcc, srocc, fit_logistic, apply_logistic
from .auc import krasula_auc
from .anova import anova_factorial, EffectRow
from .selection import SelectionCandidate, select_stimuli
from .external import import_external_metric

__all__ = [
    "MosRecord",
    "ScoreMatrix",
    "mos_ci",
    "load_votes_jsonl",
    "mos_table",
    "screen_bt500",
    "screen_golden",
    "stimulus_stats",
    "LogisticParams",
    "plcc",
    "srocc",
    "fit_logistic",
    "apply_logistic",
    "krasula_auc",
    "anova_factorial",
    "EffectRow",
    "SelectionCandidate",
    "select_stimuli",
    "import_external_metric",
]
