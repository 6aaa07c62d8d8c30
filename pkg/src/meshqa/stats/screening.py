"""Participant screening: dispersion-based rejection and golden-unit rules."""

import numpy as np

from ..errors import InsufficientVotes, MissingGoldenUnit

OUTSIDE_SIGMA = 2.0
OUTSIDE_FRACTION = 0.05
EVEN_SPLIT_RATIO = 0.3


def stimulus_stats(matrix):
    """Per-stimulus (mean, population std) over all votes."""
    stats = {}
    for stimulus, pairs in matrix.by_stimulus().items():
        scores = np.array([score for _, score in pairs], dtype=np.float64)
        if len(scores) < 2:
            raise InsufficientVotes(f"stimulus {stimulus} has {len(scores)} vote(s)")
        stats[stimulus] = (scores.mean(), scores.std())
    return stats


def screen_bt500(matrix, stats=None):
    """Reject raters whose votes often fall outside the 2-sigma band.

    Per stimulus, mu and sigma (population std) are taken over all votes. A
    trial is outside when |score - mu| > 2 sigma. A participant is rejected
    iff more than 5% of their trials are outside AND the outside trials split
    evenly between the two tails: |P - Q| / (P + Q) <= 0.3. Passing frozen
    stats makes re-screening after removals a no-op for kept participants.
    """
    if stats is None:
        stats = stimulus_stats(matrix)

    rejected = set()
    for participant, trials in matrix.by_participant().items():
        above = below = 0
        for stimulus, score in trials:
            mu, sigma = stats[stimulus]
            if score - mu > OUTSIDE_SIGMA * sigma:
                above += 1
            elif mu - score > OUTSIDE_SIGMA * sigma:
                below += 1
        outside = above + below
        if outside == 0 or outside / len(trials) <= OUTSIDE_FRACTION:
            continue
        if abs(above - below) / outside <= EVEN_SPLIT_RATIO:
            rejected.add(participant)
    return rejected


def screen_golden(matrix):
    """Reject on any of the five golden-unit rules."""
    rejected = set()
    for participant in matrix.participants():
        roles = matrix.golden.get(participant, {})
        missing = {"poor", "high", "rep1", "rep2"} - roles.keys()
        if missing:
            raise MissingGoldenUnit(f"{participant} lacks golden scores: {sorted(missing)}")
        poor = roles["poor"]
        high = roles["high"]
        rep_gap = abs(roles["rep1"] - roles["rep2"])
        if (
            poor >= 4
            or high <= 2
            or rep_gap >= 3
            or (poor == 3 and high == 3)
            or ((high == 3 or poor == 3) and rep_gap == 2)
        ):
            rejected.add(participant)
    return rejected
