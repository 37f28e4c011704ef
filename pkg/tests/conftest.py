"""Shared fixtures: paths, tiny corpora and synthetic vector sets."""

import os

import numpy as np
import pytest

from aisclust import Antigen, Document, DocumentSet

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "data", "sgml_fixture")


@pytest.fixture(scope="session")
def fixture_corpus_dir():
    """Directory of checked-in SGML files: 20 files x 20 labeled records."""
    return FIXTURE_DIR


@pytest.fixture
def two_sentence_docs():
    """The two normalization walk-through sentences as a document set."""
    return DocumentSet(documents=(
        Document(id="d0", body="The girl eats the apple", label="a", source="s"),
        Document(id="d1", body="the fisherman fishing", label="b", source="s"),
    ))


def make_blobs(seed, dim=4, per=30, sigma=0.05, n_blobs=3):
    """Unit-normalized Gaussian blobs around the first ``n_blobs`` axes.

    Axis-aligned centers are pairwise orthogonal, so their cosine similarity
    is 0. Returns (points, integer blob labels).
    """
    rng = np.random.default_rng(seed)
    centers = np.eye(dim)[:n_blobs]
    points, labels = [], []
    for c in range(n_blobs):
        pts = centers[c] + rng.normal(0.0, sigma, size=(per, dim))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        points.append(pts)
        labels.extend([c] * per)
    return np.vstack(points), np.array(labels)


def blob_antigens(X):
    return [Antigen(doc_id=str(i), vector=X[i]) for i in range(len(X))]
