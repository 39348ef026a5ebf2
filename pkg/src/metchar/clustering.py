"""Seeded Lloyd k-means whose assignment step uses a WeightedMetric.

Centroids live in feature space: each centroid holds one real-valued mean
vector per profile feature, and the distance from a sample to a centroid is
the weighted sum of the component distances between their vectors.
"""

from dataclasses import dataclass

import numpy as np

from .features import stack_features

# Relative slack under which two weighted distances count as tied. Keeps the
# partition invariant to rescaling all weights (rounding of sum(c*w_i*d_i)
# differs from c*sum(w_i*d_i) by a few ulps).
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class ClusteringResult:
    assignments: np.ndarray
    iterations: int
    converged: bool

    def __post_init__(self):
        self.assignments.setflags(write=False)


def as_stacked(features):
    return features if isinstance(features, dict) else stack_features(features)


def centroid_distances(stacked, centroids, metric):
    """``(n, k)`` weighted distances from every sample to every centroid."""
    n = len(next(iter(stacked.values())))
    k = len(next(iter(centroids.values())))
    total = np.zeros((n, k))
    diffs = {}
    for comp, w in zip(metric.components, metric.weights):
        if w == 0.0:
            continue
        f = comp.feature
        if f not in diffs:
            diffs[f] = stacked[f][:, None, :] - centroids[f][None, :, :]
        diff = diffs[f]
        if comp.op == "md":
            d = np.abs(diff).sum(axis=2)
        else:
            d = np.sqrt((diff * diff).sum(axis=2))
        total += w * d
    return total


def _assign(dist):
    best = dist.min(axis=1, keepdims=True)
    return (dist <= best * (1.0 + TIE_RTOL)).argmax(axis=1)


def _objective(dist, labels):
    return float(dist[np.arange(len(labels)), labels].sum())


def _repair_empty(labels, dist, k):
    """Give each empty cluster the sample farthest from its own centroid.

    Only samples in clusters with more than one member are eligible; ties go
    to the lowest sample index.
    """
    labels = labels.copy()
    sizes = np.bincount(labels, minlength=k)
    rows = np.arange(len(labels))
    for j in np.flatnonzero(sizes == 0):
        own = dist[rows, labels]
        eligible = sizes[labels] > 1
        far = own[eligible].max()
        i = int(np.argmax(eligible & (own >= far * (1.0 - TIE_RTOL))))
        sizes[labels[i]] -= 1
        labels[i] = j
        sizes[j] = 1
    return labels


def _means(stacked, labels, k):
    return {
        f: np.array([X[labels == j].mean(axis=0) for j in range(k)]) for f, X in stacked.items()
    }


def kmeans(features, k, metric, seed=0, max_iter=100, trace=None):
    """Cluster `features` into `k` groups under `metric`.

    Parameters
    ----------
    features : list of FeatureSet, or the dict returned by ``stack_features``
    k : int
        Number of clusters, ``1 <= k <= n``.
    metric : WeightedMetric
    seed : int
        Seeds the choice of the k distinct initial samples.
    max_iter : int
        Maximum number of assignment steps.
    trace : list, optional
        If given, receives one ``(before, after)`` pair per assignment step
        after the first: the within-cluster objective of the previous
        partition and of the new one, both under the same centroids.

    Returns
    -------
    ClusteringResult
        ``assignments`` is the output of the last assignment step. Empty
        clusters are repaired only for the subsequent centroid update.
    """
    stacked = as_stacked(features)
    n = len(next(iter(stacked.values())))
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"cannot form {k} clusters from {n} samples")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    init = np.random.default_rng(seed).choice(n, size=k, replace=False)
    centroids = {f: X[init].copy() for f, X in stacked.items()}
    prev = labels = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        dist = centroid_distances(stacked, centroids, metric)
        assign = _assign(dist)
        if trace is not None and labels is not None:
            trace.append((_objective(dist, labels), _objective(dist, assign)))
        if prev is not None and np.array_equal(assign, prev):
            converged = True
            break
        prev = assign
        labels = _repair_empty(assign, dist, k)
        centroids = _means(stacked, labels, k)
    return ClusteringResult(assign, it, converged)
