"""Opinion-score aggregation and the vote matrix ingested from study exports."""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import t as t_dist

from ..errors import NoScores

GOLDEN_ROLES = ("poor", "high", "rep1", "rep2")


@dataclass
class MosRecord:
    stimulus_id: str
    mos: float
    ci95: float
    n: int


def mos_ci(scores, stimulus_id=""):
    """Mean opinion score with a 95% t confidence half-width.

    CI = t(0.975, n-1) * s / sqrt(n) with sample std s; zero when n = 1 or
    all scores agree.
    """
    scores = np.asarray(list(scores), dtype=np.float64)
    n = len(scores)
    if n == 0:
        raise NoScores(f"no votes for {stimulus_id or 'stimulus'}")
    mean = float(scores.mean())
    if n == 1:
        return MosRecord(stimulus_id, mean, 0.0, 1)
    s = float(scores.std(ddof=1))
    if s == 0.0:
        return MosRecord(stimulus_id, mean, 0.0, n)
    half = float(t_dist.ppf(0.975, n - 1) * s / np.sqrt(n))
    return MosRecord(stimulus_id, mean, half, n)


@dataclass
class ScoreMatrix:
    """Votes by (participant, stimulus) plus golden-unit annotations.

    votes holds the test trials (golden rep1 doubles as a test item); golden
    maps participant -> {role: score} for roles poor/high/rep1/rep2.
    """

    votes: list = field(default_factory=list)  # (participant, stimulus, score)
    golden: dict = field(default_factory=dict)
    playlist_by_stimulus: dict = field(default_factory=dict)

    def participants(self):
        return sorted({p for p, _, _ in self.votes} | set(self.golden))

    def stimuli(self):
        return sorted({s for _, s, _ in self.votes})

    def by_stimulus(self):
        table = {}
        for participant, stimulus, score in self.votes:
            table.setdefault(stimulus, []).append((participant, score))
        return table

    def by_participant(self):
        table = {}
        for participant, stimulus, score in self.votes:
            table.setdefault(participant, []).append((stimulus, score))
        return table


def load_votes_jsonl(path_or_lines):
    """Build a ScoreMatrix from the study service's JSON-lines export.

    Records need session_id, stimulus_id, score; optional golden_role and
    playlist_id. Roles poor/high/rep2 are screening-only trials; rep1 counts
    as a regular test vote as well.
    """
    if isinstance(path_or_lines, (str, bytes)) or hasattr(path_or_lines, "__fspath__"):
        with open(path_or_lines, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = list(path_or_lines)
    matrix = ScoreMatrix()
    for line in lines:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        participant = str(rec["session_id"])
        stimulus = str(rec["stimulus_id"])
        score = int(rec["score"])
        role = rec.get("golden_role")
        if role is not None:
            if role not in GOLDEN_ROLES:
                raise ValueError(f"unknown golden role {role!r}")
            matrix.golden.setdefault(participant, {})[role] = score
        if role is None or role == "rep1":
            matrix.votes.append((participant, stimulus, score))
        if "playlist_id" in rec:
            matrix.playlist_by_stimulus[stimulus] = rec["playlist_id"]
    return matrix


def mos_table(matrix, rejected=()):
    """Per-stimulus MosRecords over non-rejected participants."""
    rejected = set(rejected)
    records = []
    for stimulus, pairs in sorted(matrix.by_stimulus().items()):
        scores = [score for participant, score in pairs if participant not in rejected]
        if scores:
            records.append(mos_ci(scores, stimulus))
    return records
