"""Applicability-domain filter by neighbor distance.

A query x is inside the domain when D_i, the mean Euclidean distance from
x to its K nearest training rows, satisfies D_i <= D̄_t + Z*S_t, where
D̄_t and S_t are the mean and standard deviation of that same statistic
computed for each training row against the rest of the training set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ADModel:
    train: np.ndarray  # (n, d)
    k: int
    z: float
    d_bar: float
    s: float

    @property
    def threshold(self) -> float:
        return self.d_bar + self.z * self.s


def _mean_knn_distance(dists: np.ndarray, k: int) -> float:
    nearest = np.partition(dists, k - 1)[:k]
    return float(nearest.mean())


def fit_ad_model(
    train: np.ndarray, k: int | None = None, z: float = 1.5
) -> ADModel:
    train = np.asarray(train, dtype=np.float64)
    if train.ndim != 2:
        raise ValueError("training matrix must be 2-D")
    n = train.shape[0]
    if k is None:
        k = int(round(np.sqrt(n)))
    if n <= k:
        raise ValueError(f"need more than k={k} training rows, got {n}")
    stats = np.empty(n)
    for i in range(n):
        d = np.linalg.norm(train - train[i], axis=1)
        d = np.delete(d, i)  # each row's statistic excludes itself
        stats[i] = _mean_knn_distance(d, k)
    return ADModel(
        train=train, k=k, z=z, d_bar=float(stats.mean()), s=float(stats.std())
    )


def ad_distance(x: np.ndarray, model: ADModel) -> float:
    d = np.linalg.norm(model.train - np.asarray(x, dtype=np.float64), axis=1)
    return _mean_knn_distance(d, model.k)


def ad_inside(x: np.ndarray, model: ADModel) -> bool:
    return ad_distance(x, model) <= model.threshold
