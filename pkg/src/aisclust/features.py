"""Term reduction and weighting.

Two stages sit between raw gram counts and document vectors:

* a chi-square screen that scores every (gram, document) cell of the count
  matrix against the independence expectation and keeps, for each document,
  the best-scoring grams that actually occur in it;
* TF-IDF weighting followed by per-document L2 normalization (the "TFC"
  variant), which makes cosine similarity directly comparable across
  documents of different lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_int
from .ngrams import TermDocMatrix, Vocabulary


@dataclass(frozen=True)
class Chi2Table:
    """Dense per-cell chi-square scores aligned with a TermDocMatrix."""

    scores: np.ndarray


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the per-document top-k term screen."""

    vocabulary: Vocabulary
    row_indices: np.ndarray
    n_before: int
    n_after: int

    @property
    def reduction_rate(self):
        return 1.0 - self.n_after / self.n_before


@dataclass(frozen=True)
class WeightedMatrix:
    """TF-IDF weights in the same terms-by-documents layout as the counts."""

    vocabulary: Vocabulary
    weights: sparse.csr_matrix
    doc_ids: tuple[str, ...]
    excluded_docs: tuple[str, ...]


@dataclass(frozen=True)
class VectorSet:
    """One vector per document, rows aligned with ``doc_ids``.

    Non-excluded rows have unit L2 norm; excluded documents (no grams, or a
    zero weight vector) are kept as all-zero rows and listed by id.
    """

    vectors: np.ndarray
    doc_ids: tuple[str, ...]
    excluded_docs: tuple[str, ...]
    terms: tuple[str, ...] = ()

    def included_rows(self):
        excluded = set(self.excluded_docs)
        return [i for i, d in enumerate(self.doc_ids) if d not in excluded]


def _chi2_cells(counts, row_totals, col_totals, grand_total):
    """Per-cell independence deviation for the included (nonzero) columns.

    For each cell the score is (observed - expected)^2 / expected with
    expected = row_total * col_total / grand_total. Columns whose total is
    zero stay zero.
    """
    if grand_total <= 0:
        raise ValueError("count matrix is empty")
    if (row_totals == 0).any():
        raise ValueError("a term row has zero total")
    included = col_totals > 0
    scores = np.zeros(counts.shape, dtype=np.float64)
    observed = np.asarray(counts[:, included].todense(), dtype=np.float64)
    expected = np.outer(row_totals, col_totals[included]) / grand_total
    scores[:, included] = (observed - expected) ** 2 / expected
    return scores


def chi2_scores(matrix):
    """Score every cell of a TermDocMatrix. Returns a :class:`Chi2Table`."""
    return Chi2Table(scores=_chi2_cells(matrix.counts, matrix.row_totals,
                                        matrix.col_totals, matrix.grand_total))


def _topk_union(counts, scores, k_per_doc):
    """Row indices of each column's top-k scoring present terms, unioned.

    Only grams that occur in a document compete for that document's slots.
    Ties are broken toward the lower row index, which is lexicographic term
    order when rows follow a sorted vocabulary.
    """
    k_per_doc = check_int(k_per_doc, "k_per_doc", minimum=1)
    csc = counts.tocsc()
    col_totals = np.asarray(csc.sum(axis=0)).ravel()
    keep = set()
    for j in range(csc.shape[1]):
        if col_totals[j] == 0:
            continue
        present = csc.indices[csc.indptr[j]:csc.indptr[j + 1]]
        cell = scores[present, j]
        order = np.lexsort((present, -cell))
        keep.update(present[order[:k_per_doc]].tolist())
    return np.array(sorted(keep), dtype=np.int64)


def select_terms(matrix, table, k_per_doc):
    """Union of every document's top ``k_per_doc`` grams by chi-square score.

    Returns a :class:`SelectionResult` carrying the reduced vocabulary, the
    surviving row indices and the achieved reduction rate. With ``k_per_doc``
    at least the vocabulary size this is the identity selection.
    """
    if table.scores.shape != matrix.counts.shape:
        raise ValueError("score table does not match the count matrix")
    rows = _topk_union(matrix.counts, table.scores, k_per_doc)
    reduced = Vocabulary(n=matrix.vocabulary.n,
                         terms=tuple(matrix.vocabulary.terms[i] for i in rows))
    return SelectionResult(vocabulary=reduced, row_indices=rows,
                           n_before=len(matrix.vocabulary), n_after=len(rows))


def restrict_matrix(matrix, selection):
    """Drop every row outside the selection, keeping marginals consistent.

    The original exclusion list is preserved: a document that only became
    empty through the restriction is not silently reclassified, and the
    weighting stage will reject it.
    """
    counts = matrix.counts[selection.row_indices, :]
    row_totals = np.asarray(counts.sum(axis=1)).ravel().astype(np.int64)
    col_totals = np.asarray(counts.sum(axis=0)).ravel().astype(np.int64)
    if (row_totals == 0).any():
        raise ValueError("selection kept a term with no occurrences")
    return TermDocMatrix(vocabulary=selection.vocabulary, counts=counts,
                         row_totals=row_totals, col_totals=col_totals,
                         grand_total=int(col_totals.sum()),
                         doc_ids=matrix.doc_ids,
                         excluded_docs=matrix.excluded_docs)


def _tfidf_cells(counts, excluded_cols, log_base=None):
    counts = sparse.csr_matrix(counts, dtype=np.float64)
    col_totals = np.asarray(counts.sum(axis=0)).ravel()
    included = ~excluded_cols
    bad = np.flatnonzero(included & (col_totals == 0))
    if bad.size:
        raise ValueError(f"included documents with empty columns: {bad[:5].tolist()}")
    n_docs = int(included.sum())
    if n_docs == 0:
        raise ValueError("no included documents")

    inv_totals = np.zeros_like(col_totals)
    nz = col_totals > 0
    inv_totals[nz] = 1.0 / col_totals[nz]
    tf = counts.multiply(inv_totals[np.newaxis, :]).tocsr()

    df = np.asarray((counts[:, included] > 0).sum(axis=1)).ravel()
    if (df == 0).any():
        raise ValueError("a term occurs only in excluded documents")
    idf = np.log(n_docs / df)
    if log_base is not None:
        idf = idf / math.log(log_base)
    weights = tf.multiply(idf[:, np.newaxis]).tocsr()
    weights.eliminate_zeros()
    return weights


def tfidf_weight(matrix, log_base=None):
    """TF-IDF weights for a (reduced) TermDocMatrix.

    TF is the gram's share of its document's total count; IDF is
    ``log(N / DF)`` with both N and DF taken over included documents only.
    The logarithm is natural by default; ``log_base`` exists because the
    downstream normalization makes the result base-invariant, and tests pin
    that down. Grams present in every included document get weight zero.
    """
    excluded_cols = np.array([d in set(matrix.excluded_docs) for d in matrix.doc_ids])
    weights = _tfidf_cells(matrix.counts, excluded_cols, log_base=log_base)
    return WeightedMatrix(vocabulary=matrix.vocabulary, weights=weights,
                          doc_ids=matrix.doc_ids,
                          excluded_docs=matrix.excluded_docs)


def _l2_normalize_rows(dense):
    norms = np.linalg.norm(dense, axis=1)
    nz = norms > 0
    dense[nz] = dense[nz] / norms[nz, np.newaxis]
    return dense, nz


def tfc_normalize(weighted):
    """Scale every document's weight vector to unit L2 norm.

    Documents whose weight vector has zero norm cannot be normalized; they
    stay as zero rows and are reported in ``excluded_docs`` alongside the
    exclusions inherited from earlier stages.
    """
    dense = np.asarray(weighted.weights.todense(), dtype=np.float64).T.copy()
    dense, nz = _l2_normalize_rows(dense)
    excluded = list(weighted.excluded_docs)
    seen = set(excluded)
    for i in np.flatnonzero(~nz):
        doc = weighted.doc_ids[i]
        if doc not in seen:
            excluded.append(doc)
            seen.add(doc)
    return VectorSet(vectors=dense, doc_ids=weighted.doc_ids,
                     excluded_docs=tuple(excluded),
                     terms=weighted.vocabulary.terms)


class ChiSquareTermSelector(BaseEstimator, TransformerMixin):
    """Column screen for documents-by-grams count matrices.

    ``fit`` scores each cell against the independence expectation and keeps
    the union of every document's top ``k_per_doc`` occurring grams;
    ``transform`` restricts a matrix to the surviving columns. Exposes
    ``selected_indices_``, ``n_features_before_`` and ``reduction_rate_``.
    """

    def __init__(self, k_per_doc=10):
        self.k_per_doc = k_per_doc

    def fit(self, X, y=None):
        counts = sparse.csr_matrix(X).T.tocsr()
        row_totals = np.asarray(counts.sum(axis=1)).ravel()
        col_totals = np.asarray(counts.sum(axis=0)).ravel()
        scores = _chi2_cells(counts, row_totals, col_totals, int(col_totals.sum()))
        self.selected_indices_ = _topk_union(counts, scores, self.k_per_doc)
        self.n_features_before_ = counts.shape[0]
        self.reduction_rate_ = 1.0 - self.selected_indices_.size / counts.shape[0]
        return self

    def transform(self, X):
        if not hasattr(self, "selected_indices_"):
            raise RuntimeError("selector is not fitted")
        return sparse.csr_matrix(X)[:, self.selected_indices_]


class TfcWeighter(BaseEstimator, TransformerMixin):
    """TF-IDF weighting plus unit-norm scaling for count matrices.

    Works on documents-by-grams counts. DF statistics are learned at fit
    time over documents with at least one count; ``transform`` returns a
    dense array whose nonzero rows have unit L2 norm.
    """

    def fit(self, X, y=None):
        X = sparse.csr_matrix(X, dtype=np.float64)
        row_totals = np.asarray(X.sum(axis=1)).ravel()
        included = row_totals > 0
        n_docs = int(included.sum())
        if n_docs == 0:
            raise ValueError("no document has any counts")
        df = np.asarray((X[included] > 0).sum(axis=0)).ravel()
        idf = np.zeros(X.shape[1], dtype=np.float64)
        nz = df > 0
        idf[nz] = np.log(n_docs / df[nz])
        self.idf_ = idf
        self.n_documents_ = n_docs
        return self

    def transform(self, X):
        if not hasattr(self, "idf_"):
            raise RuntimeError("weighter is not fitted")
        X = sparse.csr_matrix(X, dtype=np.float64)
        row_totals = np.asarray(X.sum(axis=1)).ravel()
        inv = np.zeros_like(row_totals)
        nz = row_totals > 0
        inv[nz] = 1.0 / row_totals[nz]
        tf = X.multiply(inv[:, np.newaxis])
        dense = np.asarray(tf.multiply(self.idf_[np.newaxis, :]).todense())
        dense, _ = _l2_normalize_rows(dense)
        return dense
