"""Training-set class-balance correction: random duplication and SMOTE.

Both methods only append rows; original rows are never touched and
majority rows never change. Applied to training partitions only — the
experiment runner keeps validation and test rows out of reach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import MinorityTooSmallError, SingleClassError

METHODS = ("random_over", "smote")


@dataclass(frozen=True)
class ResamplePlan:
    method: str
    target_ratio: float = 1.0
    smote_k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown resampling method: {self.method}")
        if not 0.0 < self.target_ratio <= 1.0:
            raise ValueError(f"target_ratio must be in (0, 1], got {self.target_ratio}")
        if self.smote_k < 1:
            raise ValueError(f"smote_k must be ≥ 1, got {self.smote_k}")

    def with_seed(self, seed: int) -> "ResamplePlan":
        return ResamplePlan(self.method, self.target_ratio, self.smote_k, int(seed))


def _minority_majority(ds: Dataset) -> tuple[int, int]:
    n0, n1 = ds.class_counts()
    if n0 == 0 or n1 == 0:
        raise SingleClassError("resampling needs both classes present")
    return (0, 1) if n0 < n1 else (1, 0)


def _target_count(plan: ResamplePlan, n_majority: int) -> int:
    return math.ceil(plan.target_ratio * n_majority)


def _append(ds: Dataset, new_rows: np.ndarray, minority_label: int) -> Dataset:
    if new_rows.shape[0] == 0:
        return ds
    rows = np.vstack([ds.rows, new_rows])
    labels = np.concatenate(
        [ds.labels, np.full(new_rows.shape[0], minority_label, dtype=np.int64)]
    )
    return Dataset(ds.schema, rows, labels)


def random_oversample(train: Dataset, plan: ResamplePlan) -> Dataset:
    """Append seeded uniform-with-replacement copies of minority rows to the target ratio."""
    minority, majority = _minority_majority(train)
    counts = train.class_counts()
    need = _target_count(plan, counts[majority]) - counts[minority]
    if need <= 0:
        return train
    rng = np.random.default_rng(plan.seed)
    pool = np.flatnonzero(train.labels == minority)
    picks = pool[rng.integers(0, pool.size, size=need)]
    return _append(train, train.rows[picks], minority)


def smote_oversample(train: Dataset, plan: ResamplePlan) -> Dataset:
    """Append synthetic minority rows interpolated toward nearby minority rows.

    Seed points rotate round-robin over the minority rows from a seeded
    start, one of the seed's k nearest minority neighbors (euclidean) is
    chosen uniformly, and the synthetic point is x + u·(z − x), u ∈ [0, 1).
    """
    minority, majority = _minority_majority(train)
    counts = train.class_counts()
    pool = np.flatnonzero(train.labels == minority)
    if pool.size < 2:
        raise MinorityTooSmallError("SMOTE needs at least 2 minority rows")
    need = _target_count(plan, counts[majority]) - counts[minority]
    if need <= 0:
        return train

    points = train.rows[pool]
    k = min(plan.smote_k, pool.size - 1)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    neighbor_lists = np.argsort(dist, axis=1, kind="stable")[:, :k]

    rng = np.random.default_rng(plan.seed)
    start = int(rng.integers(0, pool.size))
    seeds = (start + np.arange(need)) % pool.size
    picks = neighbor_lists[seeds, rng.integers(0, k, size=need)]
    u = rng.random(need)[:, None]
    new_rows = points[seeds] + u * (points[picks] - points[seeds])
    return _append(train, new_rows, minority)


def oversample(train: Dataset, plan: ResamplePlan) -> Dataset:
    if plan.method == "random_over":
        return random_oversample(train, plan)
    return smote_oversample(train, plan)
