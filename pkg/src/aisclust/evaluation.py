"""Clustering quality measures and the k-means reference clusterer.

The F-measure follows the weighted best-match form: for every reference
class, precision and recall are computed against each cluster, the class
takes the best ``(1 + beta) * r * p / (beta * r + p)`` over clusters, and
classes are averaged weighted by size. With ``beta = 1`` the inner term is
the usual harmonic mean of precision and recall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from ._validation import check_int, check_matrix, check_real
from .corpus import UNLABELED
from .immune import Clustering


@dataclass(frozen=True)
class ConfusionCounts:
    """Joint counts between reference classes and predicted clusters."""

    total: int
    class_sizes: dict[str, int]
    cluster_sizes: dict[int, int]
    joint: dict[tuple[str, int], int]
    excluded_unlabeled: tuple[str, ...]

    def count(self, label, cluster):
        return self.joint.get((label, cluster), 0)


def confusion(clustering, labels):
    """Cross-tabulate a clustering against reference labels.

    ``labels`` maps document id to class label. Documents labeled
    ``unlabeled`` (or missing from ``labels``) are left out of the counts and
    reported in ``excluded_unlabeled``. Raises if nothing overlaps.
    """
    class_sizes = {}
    cluster_sizes = {}
    joint = {}
    excluded = []
    for doc_id, cluster in clustering.assignment.items():
        label = labels.get(doc_id, UNLABELED)
        if label == UNLABELED:
            excluded.append(doc_id)
            continue
        class_sizes[label] = class_sizes.get(label, 0) + 1
        cluster_sizes[cluster] = cluster_sizes.get(cluster, 0) + 1
        joint[(label, cluster)] = joint.get((label, cluster), 0) + 1
    total = sum(class_sizes.values())
    if total == 0:
        raise ValueError("no labeled documents intersect the clustering")
    return ConfusionCounts(total=total, class_sizes=class_sizes,
                           cluster_sizes=cluster_sizes, joint=joint,
                           excluded_unlabeled=tuple(excluded))


def _class_best(counts, label, beta):
    """Best cluster for one class: (cluster, precision, recall, f)."""
    size = counts.class_sizes[label]
    best = (None, 0.0, 0.0, 0.0)
    for cluster in sorted(counts.cluster_sizes):
        n = counts.count(label, cluster)
        precision = n / counts.cluster_sizes[cluster]
        recall = n / size
        denom = beta * recall + precision
        f = (1.0 + beta) * recall * precision / denom if denom > 0 else 0.0
        if f > best[3]:
            best = (cluster, precision, recall, f)
    return best


def f_measure(counts, beta=1.0):
    """Size-weighted best-match F over all reference classes."""
    beta = check_real(beta, "beta", strict_min=0.0)
    total = 0.0
    for label, size in counts.class_sizes.items():
        total += (size / counts.total) * _class_best(counts, label, beta)[3]
    return total


@dataclass(frozen=True)
class PurityResult:
    per_cluster: dict[int, float]
    weighted_mean: float


def purity(counts):
    """Majority-class share per cluster, and the size-weighted mean."""
    per_cluster = {}
    weighted = 0.0
    for cluster, size in counts.cluster_sizes.items():
        best = max((counts.count(label, cluster) for label in counts.class_sizes),
                   default=0)
        share = best / size
        per_cluster[cluster] = share
        weighted += (size / counts.total) * share
    return PurityResult(per_cluster=per_cluster, weighted_mean=weighted)


@dataclass(frozen=True)
class ClassReport:
    label: str
    size: int
    best_cluster: int | None
    precision: float
    recall: float
    f: float


@dataclass(frozen=True)
class EvaluationReport:
    f_measure: float
    beta: float
    num_clusters: int
    per_class: tuple[ClassReport, ...]
    purity_per_cluster: dict[int, float]
    purity_weighted: float
    excluded_unlabeled: tuple[str, ...]


def evaluate_clustering(clustering, labels, beta=1.0):
    """Bundle confusion, F-measure and purity into one report."""
    counts = confusion(clustering, labels)
    per_class = []
    for label in sorted(counts.class_sizes):
        cluster, precision, recall, f = _class_best(counts, label, beta)
        per_class.append(ClassReport(label=label, size=counts.class_sizes[label],
                                     best_cluster=cluster, precision=precision,
                                     recall=recall, f=f))
    pur = purity(counts)
    return EvaluationReport(f_measure=f_measure(counts, beta), beta=beta,
                            num_clusters=clustering.num_clusters,
                            per_class=tuple(per_class),
                            purity_per_cluster=pur.per_cluster,
                            purity_weighted=pur.weighted_mean,
                            excluded_unlabeled=counts.excluded_unlabeled)


def stirling_partitions(n, k):
    """Number of ways to split n labeled items into exactly k nonempty groups.

    Exact integer arithmetic:
    ``(1/k!) * sum_i C(k, i) * (-1)^(k-i) * i^n``.
    """
    n = check_int(n, "n", minimum=1)
    k = check_int(k, "k", minimum=1)
    if k > n:
        raise ValueError(f"cannot split {n} items into {k} nonempty groups")
    total = 0
    for i in range(k + 1):
        total += math.comb(k, i) * ((-1) ** (k - i)) * (i ** n)
    return total // math.factorial(k)


def _farthest_point_init(X, k, rng):
    """Seeded farthest-point center choice: random first pick, then repeatedly
    the point with the largest distance to its nearest chosen center."""
    centers = [int(rng.integers(X.shape[0]))]
    d2 = np.sum((X - X[centers[0]]) ** 2, axis=1)
    while len(centers) < k:
        nxt = int(np.argmax(d2))
        centers.append(nxt)
        d2 = np.minimum(d2, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[centers].copy()


def kmeans_baseline(vector_set, k, seed=0, max_iter=100):
    """Plain Lloyd iterations over the non-excluded document vectors.

    Uses the seeded farthest-point initialization; a cluster that empties
    during an update is re-seeded with the point farthest from its current
    center. Deterministic given the seed. Returns a :class:`Clustering`
    keyed by document id.
    """
    included = vector_set.included_rows()
    X = check_matrix(vector_set.vectors[included], "vectors")
    ids = [vector_set.doc_ids[i] for i in included]
    k = check_int(k, "k", minimum=1, maximum=X.shape[0])
    max_iter = check_int(max_iter, "max_iter", minimum=1)

    rng = np.random.default_rng(seed)
    centers = _farthest_point_init(X, k, rng)
    labels = np.full(X.shape[0], -1, dtype=np.int64)
    d2 = np.empty((X.shape[0], k), dtype=np.float64)
    for _ in range(max_iter):
        for c in range(k):
            diff = X - centers[c]
            d2[:, c] = np.sum(diff * diff, axis=1)
        new_labels = np.argmin(d2, axis=1)
        own = d2[np.arange(X.shape[0]), new_labels]
        for c in range(k):
            members = new_labels == c
            if not members.any():
                far = int(np.argmax(own))
                centers[c] = X[far]
                new_labels[far] = c
                own[far] = 0.0
        if (new_labels == labels).all():
            break
        labels = new_labels
        for c in range(k):
            centers[c] = X[labels == c].mean(axis=0)

    assignment = {doc: int(c) for doc, c in zip(ids, labels)}
    centers_map = {c: centers[c].copy() for c in sorted(set(labels.tolist()))}
    return Clustering(assignment=assignment, centers=centers_map,
                      num_clusters=len(centers_map))


class KMeansBaseline(BaseEstimator, ClusterMixin):
    """Estimator face of :func:`kmeans_baseline` for array input."""

    def __init__(self, n_clusters=8, max_iter=100, random_state=0):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        from .features import VectorSet

        X = check_matrix(X, "X")
        vs = VectorSet(vectors=X, doc_ids=tuple(str(i) for i in range(X.shape[0])),
                       excluded_docs=())
        clustering = kmeans_baseline(vs, self.n_clusters, seed=self.random_state,
                                     max_iter=self.max_iter)
        self.labels_ = np.array([clustering.assignment[str(i)]
                                 for i in range(X.shape[0])], dtype=np.int64)
        self.cluster_centers_ = np.array([clustering.centers[c]
                                          for c in sorted(clustering.centers)])
        self.n_clusters_ = clustering.num_clusters
        return self
