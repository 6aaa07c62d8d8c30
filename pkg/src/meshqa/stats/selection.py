"""Balanced stimulus selection over the plane of two predicted-score axes.

The pivot axis is cut into 5 equal score ranges with an equal point budget
per range; a uniform grid of sample points covers each range's rectangle and
every point grabs the nearest still-available candidate, preferring ones that
respect the balance bounds. A deterministic swap-repair pass then removes any
remaining bound violation. Bounds: per-model counts within +-1 of each other,
per-level counts of each distortion dimension within +-10% of uniform.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleConstraints

PIVOT_RANGES = 5
LEVEL_TOLERANCE = 0.10


@dataclass(frozen=True)
class SelectionCandidate:
    stimulus_id: str
    pivot: float  # predicted score on the pivot metric
    secondary: float  # predicted score on the second metric
    model_id: str
    levels: tuple  # (lod, qp, qt, ts, tq) or any per-dimension level tuple


def _grid_points(a_lo, a_hi, b_lo, b_hi, count):
    if count <= 0:
        return np.zeros((0, 2))
    cols = int(np.ceil(np.sqrt(count)))
    rows = int(np.ceil(count / cols))
    a_centers = a_lo + (np.arange(cols) + 0.5) * (a_hi - a_lo) / cols
    b_centers = b_lo + (np.arange(rows) + 0.5) * (b_hi - b_lo) / rows
    pts = [(a, b) for b in b_centers for a in a_centers]
    return np.array(pts[:count])


class _BalanceFamily:
    """Counting bound over one grouping of candidates (vectorized)."""

    def __init__(self, name, groups, cap, floor):
        self.name = name
        self.keys = sorted(set(groups))
        index = {k: i for i, k in enumerate(self.keys)}
        self.group_idx = np.array([index[g] for g in groups], dtype=np.int64)
        self.cap = cap
        self.floor = floor
        self.counts = np.zeros(len(self.keys), dtype=np.int64)

    def over_cap_mask(self):
        """Per-candidate flag: adding this candidate would exceed the cap."""
        return self.counts[self.group_idx] >= self.cap

    def below_floor_mask(self):
        return self.counts[self.group_idx] < self.floor

    def deficit(self):
        return int(np.maximum(self.floor - self.counts, 0).sum())

    def violation(self):
        over = np.maximum(self.counts - self.cap, 0).sum()
        return int(over) + self.deficit()

    def add(self, idx):
        self.counts[self.group_idx[idx]] += 1

    def remove(self, idx):
        self.counts[self.group_idx[idx]] -= 1

    def first_violated_key(self):
        for i, key in enumerate(self.keys):
            if self.counts[i] > self.cap:
                return key, "over"
            if self.counts[i] < self.floor:
                return key, "under"
        return None


def _build_families(candidates, target_count, dimension_names):
    models = [c.model_id for c in candidates]
    n_models = len(set(models))
    families = [
        _BalanceFamily(
            "model balance",
            models,
            int(np.ceil(target_count / n_models)),
            target_count // n_models,
        )
    ]
    n_dims = len(candidates[0].levels)
    if dimension_names is None:
        dimension_names = [f"dim{i}" for i in range(n_dims)]
    for d in range(n_dims):
        levels = [c.levels[d] for c in candidates]
        uniform = target_count / len(set(levels))
        # the 1e-9 nudges absorb float noise in the 10% band edges
        cap = max(int(np.ceil((1.0 + LEVEL_TOLERANCE) * uniform - 1e-9)), 1)
        floor = int(np.floor((1.0 - LEVEL_TOLERANCE) * uniform + 1e-9))
        families.append(_BalanceFamily(f"{dimension_names[d]} levels", levels, cap, floor))
    return families


def _sample_points(pivot, second, target_count, rng):
    a_lo, a_hi = float(pivot.min()), float(pivot.max())
    b_lo, b_hi = float(second.min()), float(second.max())
    if a_hi == a_lo:
        a_hi = a_lo + 1.0
    if b_hi == b_lo:
        b_hi = b_lo + 1.0
    budgets = [target_count // PIVOT_RANGES] * PIVOT_RANGES
    for i in range(target_count % PIVOT_RANGES):
        budgets[i] += 1
    edges = np.linspace(a_lo, a_hi, PIVOT_RANGES + 1)
    per_range = []
    for r in range(PIVOT_RANGES):
        pts = _grid_points(edges[r], edges[r + 1], b_lo, b_hi, budgets[r])
        per_range.append([pts[i] for i in rng.permutation(len(pts))])
    # interleave ranges so each keeps drawing from its own quality band
    points = []
    for k in range(max(map(len, per_range))):
        for r in range(PIVOT_RANGES):
            if k < len(per_range[r]):
                points.append(per_range[r][k])
    return points


def _swap_violation_delta(families, out_idx, in_idx):
    delta = 0
    for fam in families:
        ko = fam.group_idx[out_idx]
        ki = fam.group_idx[in_idx]
        if ko == ki:
            continue
        co = fam.counts[ko]
        ci = fam.counts[ki]
        delta += (max(0, co - 1 - fam.cap) + max(0, fam.floor - (co - 1))) - (
            max(0, co - fam.cap) + max(0, fam.floor - co)
        )
        delta += (max(0, ci + 1 - fam.cap) + max(0, fam.floor - (ci + 1))) - (
            max(0, ci - fam.cap) + max(0, fam.floor - ci)
        )
    return delta


def _repair(families, chosen, available):
    """Deterministic swaps until every family bound holds."""
    guard = 0
    limit = 4 * len(chosen) + 200
    while True:
        violated = None
        for fam in families:
            hit = fam.first_violated_key()
            if hit:
                violated = (fam, *hit)
                break
        if violated is None:
            return
        guard += 1
        fam, key, kind = violated
        key_idx = fam.keys.index(key)
        if guard > limit:
            raise InfeasibleConstraints(f"cannot repair {fam.name} at level {key!r}")
        pool = np.nonzero(available)[0]
        if kind == "over":
            outs = [(pos, i) for pos, i in enumerate(chosen) if fam.group_idx[i] == key_idx]
            ins = pool
        else:
            ins = [i for i in pool if fam.group_idx[i] == key_idx]
            outs = [(pos, i) for pos, i in enumerate(chosen) if fam.group_idx[i] != key_idx]
        swap = None
        for pos, out_idx in outs:
            for in_idx in ins:
                if _swap_violation_delta(families, out_idx, in_idx) < 0:
                    swap = (pos, out_idx, int(in_idx))
                    break
            if swap:
                break
        if swap is None:
            raise InfeasibleConstraints(
                f"no swap can fix {fam.name} at level {key!r} "
                f"({kind} the {'cap' if kind == 'over' else 'floor'})"
            )
        pos, out_idx, in_idx = swap
        for f in families:
            f.remove(out_idx)
            f.add(in_idx)
        chosen[pos] = in_idx
        available[out_idx] = True
        available[in_idx] = False


def select_stimuli(candidates, target_count, seed=0, dimension_names=None):
    """Greedy, seeded, bound-aware subset of the candidate pool."""
    n = len(candidates)
    if target_count > n:
        raise InfeasibleConstraints(
            f"asked for {target_count} stimuli but only {n} candidates exist"
        )
    if target_count <= 0:
        return []

    pivot = np.array([c.pivot for c in candidates])
    second = np.array([c.secondary for c in candidates])
    points_xy = np.stack([pivot, second], axis=1)
    families = _build_families(candidates, target_count, dimension_names)
    rng = np.random.default_rng(seed)
    sample_points = _sample_points(pivot, second, target_count, rng)

    chosen = []
    available = np.ones(n, dtype=bool)
    slots_left = target_count
    for point in sample_points:
        # rank available candidates by cap pressure, then by floor help when
        # some family is running out of slack, then by distance
        cap_hits = np.zeros(n, dtype=np.int64)
        floor_help = np.zeros(n, dtype=np.int64)
        for fam in families:
            cap_hits += fam.over_cap_mask()
            if fam.deficit() >= slots_left:
                floor_help += fam.below_floor_mask()
        cap_hits = np.where(available, cap_hits, np.iinfo(np.int64).max)
        best_cap = cap_hits.min()
        mask = available & (cap_hits == best_cap)
        if floor_help[mask].size and floor_help[mask].max() > 0:
            best_help = floor_help[mask].max()
            mask &= floor_help == best_help
        pool = np.nonzero(mask)[0]
        dists = np.linalg.norm(points_xy[pool] - point[None, :], axis=1)
        pick = int(pool[int(np.argmin(dists))])  # argmin ties go to lowest index
        chosen.append(pick)
        available[pick] = False
        for fam in families:
            fam.add(pick)
        slots_left -= 1

    _repair(families, chosen, available)
    return [candidates[i] for i in chosen]
