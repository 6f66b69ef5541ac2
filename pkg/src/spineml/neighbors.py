"""k-nearest-neighbors classifier over a stored training matrix.

Every tie is broken deterministically: neighbor-cutoff ties go to the
lower stored-row index, vote ties to the class with the smaller summed
distance and then to the lower label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import KOutOfRangeError, WidthMismatchError

WEIGHTINGS = ("uniform", "inverse-distance")
METRICS = ("euclidean", "manhattan")

_INV_EPS = 1e-12


@dataclass(frozen=True)
class KNNModel:
    k: int
    weighting: str
    metric: str
    points: np.ndarray
    labels: np.ndarray


def knn_fit(train: Dataset, k: int, weighting: str = "uniform", metric: str = "euclidean") -> KNNModel:
    if not 1 <= k <= train.n:
        raise KOutOfRangeError(f"k must be in [1, {train.n}], got {k}")
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting: {weighting}")
    if metric not in METRICS:
        raise ValueError(f"unknown metric: {metric}")
    return KNNModel(k=k, weighting=weighting, metric=metric,
                    points=train.rows, labels=train.labels)


def _distances(points: np.ndarray, X: np.ndarray, metric: str) -> np.ndarray:
    diff = X[:, None, :] - points[None, :, :]
    if metric == "euclidean":
        return np.sqrt((diff * diff).sum(axis=2))
    return np.abs(diff).sum(axis=2)


def knn_kneighbors(model: KNNModel, x) -> np.ndarray:
    """Indices of the k nearest stored rows, ordered by (distance, index)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.points.shape[1],):
        raise WidthMismatchError(
            f"expected {model.points.shape[1]} features, got {x.shape}"
        )
    dist = _distances(model.points, x[None, :], model.metric)[0]
    order = np.argsort(dist, kind="stable")
    return order[: model.k]


def _vote(dist_k: np.ndarray, labels_k: np.ndarray, weighting: str) -> tuple[int, float]:
    if weighting == "uniform":
        weights = np.ones_like(dist_k)
    else:
        weights = 1.0 / (dist_k + _INV_EPS)
    classes = np.unique(labels_k)
    totals = np.array([weights[labels_k == c].sum() for c in classes])
    best = totals.max()
    tied = classes[totals == best]
    if tied.size > 1:
        sums = np.array([dist_k[labels_k == c].sum() for c in tied])
        tied = tied[sums == sums.min()]
    winner = int(tied.min())
    frac = float(totals[list(classes).index(winner)] / weights.sum())
    return winner, frac


def knn_predict(model: KNNModel, x) -> tuple[int, float]:
    """Winning label among the k nearest neighbors and its weight fraction."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.points.shape[1],):
        raise WidthMismatchError(
            f"expected {model.points.shape[1]} features, got {x.shape}"
        )
    dist = _distances(model.points, x[None, :], model.metric)[0]
    order = np.argsort(dist, kind="stable")[: model.k]
    return _vote(dist[order], model.labels[order], model.weighting)


def knn_predict_many(model: KNNModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != model.points.shape[1]:
        raise WidthMismatchError(
            f"expected {model.points.shape[1]} features, got {X.shape[1]}"
        )
    dist = _distances(model.points, X, model.metric)
    order = np.argsort(dist, axis=1, kind="stable")[:, : model.k]
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        idx = order[i]
        out[i] = _vote(dist[i, idx], model.labels[idx], model.weighting)[0]
    return out
