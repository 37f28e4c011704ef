"""Vector comparison: two distances and one similarity.

Euclidean and fourth-order Minkowski are distances (lower is closer); cosine
is a similarity (higher is closer). Everything downstream that needs a
uniform "closeness" notion converts cosine to ``1 - cosine``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._validation import check_matrix, check_vector_pair


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    MINKOWSKI4 = "minkowski4"
    COSINE = "cosine"

    @property
    def is_distance(self):
        return self is not Metric.COSINE

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown metric {value!r}; expected one of {names}") from None


def minkowski_distance(u, v, p):
    """Generic Minkowski distance, used to cross-check the dedicated paths."""
    u, v = check_vector_pair(u, v)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.sum(np.abs(u - v) ** p) ** (1.0 / p))


def cosine_similarity(u, v):
    """Cosine of the angle between u and v; 0 if either has zero norm."""
    u, v = check_vector_pair(u, v)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def distance(metric, u, v):
    """Compare two vectors under ``metric``.

    Returns a distance for euclidean and minkowski4, and the cosine
    similarity for cosine (kept under one entry point so callers can treat
    the metric as data).
    """
    metric = Metric.coerce(metric)
    if metric is Metric.COSINE:
        return cosine_similarity(u, v)
    u, v = check_vector_pair(u, v)
    diff = u - v
    if metric is Metric.EUCLIDEAN:
        return float(np.sqrt(np.sum(diff * diff)))
    return float(np.sum(diff ** 4) ** 0.25)


def closeness(metric, u, v):
    """Uniform distance-like comparison: ``1 - cosine`` for the cosine metric."""
    metric = Metric.coerce(metric)
    value = distance(metric, u, v)
    return 1.0 - value if metric is Metric.COSINE else value


@dataclass(frozen=True)
class SimilarityMatrix:
    """Full pairwise comparison matrix over a document collection."""

    metric: Metric
    values: np.ndarray
    doc_index: tuple[str, ...]
    zero_norm_docs: tuple[str, ...] = ()


def _rowwise_values(metric, matrix, row):
    """Metric values between one vector and every row of a matrix."""
    diff = matrix - row
    if metric is Metric.EUCLIDEAN:
        return np.sqrt(np.sum(diff * diff, axis=1))
    if metric is Metric.MINKOWSKI4:
        return np.sum(diff ** 4, axis=1) ** 0.25
    raise ValueError("cosine has no rowwise difference form")


def similarity_matrix(vector_set, metric):
    """Pairwise matrix for a :class:`~aisclust.features.VectorSet`.

    The result is exactly symmetric (the upper triangle is computed once and
    mirrored). Diagonal entries are 0 for the distance metrics; for cosine
    they are 1, except documents with zero-norm vectors, whose rows and
    columns are 0 under the zero-norm convention.
    """
    metric = Metric.coerce(metric)
    vectors = check_matrix(vector_set.vectors, "vectors")
    n = vectors.shape[0]
    values = np.zeros((n, n), dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=1)

    if metric is Metric.COSINE:
        unit = np.zeros_like(vectors)
        nz = norms > 0
        unit[nz] = vectors[nz] / norms[nz, np.newaxis]
        values = unit @ unit.T
        np.fill_diagonal(values, np.where(nz, 1.0, 0.0))
    else:
        for i in range(n):
            values[i, i:] = _rowwise_values(metric, vectors[i:], vectors[i])
        np.fill_diagonal(values, 0.0)

    upper = np.triu(values)
    values = upper + np.triu(values, 1).T

    zero_norm = tuple(vector_set.doc_ids[i] for i in np.flatnonzero(norms == 0))
    return SimilarityMatrix(metric=metric, values=values,
                            doc_index=tuple(vector_set.doc_ids),
                            zero_norm_docs=zero_norm)
