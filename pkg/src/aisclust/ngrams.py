"""Character n-gram extraction and term-document counting.

Text is first normalized (case folded, punctuation stripped, whitespace runs
replaced by a single ``-`` so word boundaries stay visible inside grams), then
sliced into overlapping windows of n characters with no padding: a text of
length L yields L - n + 1 grams, and texts shorter than n yield none.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_int

_NON_TOKEN = re.compile(r"[^A-Za-z0-9\s\-]+")
_WS_RUN = re.compile(r"\s+")


@dataclass(frozen=True)
class NormalizationOptions:
    fold_case: bool = True
    strip_punctuation: bool = True


DEFAULT_NORMALIZATION = NormalizationOptions()


def normalize_text(raw, options=DEFAULT_NORMALIZATION):
    """Map raw text onto the single-line alphabet used for gram extraction.

    Leading and trailing whitespace is dropped, interior whitespace runs
    collapse to one ``-``. With ``fold_case`` letters are lowercased; with
    ``strip_punctuation`` every character other than letters, digits,
    whitespace and ``-`` is removed (before the whitespace collapse, so
    punctuation never turns into a spurious separator).
    """
    text = raw
    if options.fold_case:
        text = text.lower()
    if options.strip_punctuation:
        text = _NON_TOKEN.sub("", text)
    return _WS_RUN.sub("-", text.strip())


def extract_ngrams(text, n):
    """All length-n windows of ``text`` in order, duplicates included."""
    n = check_int(n, "n", minimum=1)
    if len(text) < n:
        return []
    return [text[i:i + n] for i in range(len(text) - n + 1)]


@dataclass(frozen=True)
class Vocabulary:
    """Sorted gram inventory for one corpus at a fixed gram length."""

    n: int
    terms: tuple[str, ...]

    def __post_init__(self):
        bad = [t for t in self.terms if len(t) != self.n]
        if bad:
            raise ValueError(f"terms of wrong length for n={self.n}: {bad[:3]}")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    @classmethod
    def from_terms(cls, n, terms):
        return cls(n=n, terms=tuple(sorted(set(terms))))

    def __len__(self):
        return len(self.terms)

    def index(self, term):
        return self._index[term]

    @property
    def index_map(self):
        return self._index


@dataclass(frozen=True)
class TermDocMatrix:
    """Sparse gram-by-document count matrix with cached marginals.

    Rows follow ``vocabulary.terms`` (lexicographic), columns follow
    ``doc_ids``. Documents whose normalized body produced no gram at all are
    all-zero columns and are listed in ``excluded_docs``.
    """

    vocabulary: Vocabulary
    counts: sparse.csr_matrix
    row_totals: np.ndarray
    col_totals: np.ndarray
    grand_total: int
    doc_ids: tuple[str, ...]
    excluded_docs: tuple[str, ...]

    @property
    def shape(self):
        return self.counts.shape

    @property
    def included_mask(self):
        return self.col_totals > 0

    @classmethod
    def from_counts(cls, vocabulary, counts, doc_ids):
        counts = sparse.csr_matrix(counts)
        if counts.shape != (len(vocabulary), len(doc_ids)):
            raise ValueError(
                f"count matrix shape {counts.shape} does not match "
                f"{len(vocabulary)} terms x {len(doc_ids)} documents")
        row_totals = np.asarray(counts.sum(axis=1)).ravel().astype(np.int64)
        col_totals = np.asarray(counts.sum(axis=0)).ravel().astype(np.int64)
        if (row_totals == 0).any():
            zero = [vocabulary.terms[i] for i in np.flatnonzero(row_totals == 0)[:3]]
            raise ValueError(f"vocabulary terms with no occurrences: {zero}")
        excluded = tuple(doc_ids[j] for j in np.flatnonzero(col_totals == 0))
        return cls(vocabulary=vocabulary, counts=counts, row_totals=row_totals,
                   col_totals=col_totals, grand_total=int(col_totals.sum()),
                   doc_ids=tuple(doc_ids), excluded_docs=excluded)


def _gram_counter(body, n, options):
    return Counter(extract_ngrams(normalize_text(body, options), n))


def _counts_from_counters(counters, vocabulary):
    index = vocabulary.index_map
    rows, cols, data = [], [], []
    for j, counter in enumerate(counters):
        for gram, count in counter.items():
            i = index.get(gram)
            if i is not None:
                rows.append(i)
                cols.append(j)
                data.append(count)
    return sparse.csr_matrix(
        (data, (rows, cols)), shape=(len(vocabulary), len(counters)), dtype=np.int64)


def build_matrix(docs, n, options=DEFAULT_NORMALIZATION):
    """Count grams for a document collection.

    ``docs`` is a DocumentSet or any iterable of objects with ``id`` and
    ``body``. Returns ``(vocabulary, matrix)``. Raises if no document
    produces a single gram.
    """
    docs = list(docs)
    n = check_int(n, "n", minimum=1)
    counters = [_gram_counter(d.body, n, options) for d in docs]
    vocabulary = Vocabulary.from_terms(
        n, (g for counter in counters for g in counter))
    if len(vocabulary) == 0:
        raise ValueError(f"no {n}-gram occurs in any document")
    counts = _counts_from_counters(counters, vocabulary)
    matrix = TermDocMatrix.from_counts(vocabulary, counts, [d.id for d in docs])
    return vocabulary, matrix


class NgramCountVectorizer(BaseEstimator, TransformerMixin):
    """Turn raw texts into a documents-by-grams count matrix.

    The scikit-learn face of :func:`build_matrix`: ``fit`` learns the sorted
    gram vocabulary, ``transform`` returns sparse counts with one row per
    document and one column per vocabulary term (grams unseen at fit time are
    ignored). Feature columns are lexicographic, matching ``vocabulary_``.
    """

    def __init__(self, n=3, fold_case=True, strip_punctuation=True):
        self.n = n
        self.fold_case = fold_case
        self.strip_punctuation = strip_punctuation

    def _options(self):
        return NormalizationOptions(fold_case=self.fold_case,
                                    strip_punctuation=self.strip_punctuation)

    def fit(self, raw_documents, y=None):
        n = check_int(self.n, "n", minimum=1)
        options = self._options()
        counters = [_gram_counter(text, n, options) for text in raw_documents]
        self.vocabulary_ = Vocabulary.from_terms(
            n, (g for counter in counters for g in counter))
        if len(self.vocabulary_) == 0:
            raise ValueError(f"no {n}-gram occurs in any document")
        self._fit_counters = counters
        return self

    def transform(self, raw_documents):
        if not hasattr(self, "vocabulary_"):
            raise RuntimeError("vectorizer is not fitted")
        options = self._options()
        counters = [_gram_counter(text, self.n, options) for text in raw_documents]
        return _counts_from_counters(counters, self.vocabulary_).T.tocsr()

    def fit_transform(self, raw_documents, y=None):
        self.fit(raw_documents)
        counters = self._fit_counters
        del self._fit_counters
        return _counts_from_counters(counters, self.vocabulary_).T.tocsr()

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.vocabulary_.terms, dtype=object)
