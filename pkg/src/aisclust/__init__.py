"""Immune-inspired document clustering over character n-gram features.

The package follows a scikit-learn shape: the vectorization steps are
transformers (:class:`NgramCountVectorizer`, :class:`ChiSquareTermSelector`,
:class:`TfcWeighter`), the clusterers expose ``fit`` and ``labels_``
(:class:`ImmuneClustering`, :class:`KMeansBaseline`), and everything also
exists as plain functions over small domain types for scripted use and for
the command line front end.
"""

from .config import OUTPUT_ROOT_ENV, RunConfig, load_config, parse_config, serialize_config
from .corpus import (UNLABELED, Document, DocumentSet, ManifestEntry,
                     load_plaintext_dir, load_sgml, parse_sgml_corpus,
                     sample_subset)
from .evaluation import (ConfusionCounts, EvaluationReport, KMeansBaseline,
                         PurityResult, confusion, evaluate_clustering,
                         f_measure, kmeans_baseline, purity,
                         stirling_partitions)
from .features import (Chi2Table, ChiSquareTermSelector, SelectionResult,
                       TfcWeighter, VectorSet, WeightedMatrix, chi2_scores,
                       restrict_matrix, select_terms, tfc_normalize,
                       tfidf_weight)
from .immune import (AISParams, Antibody, Antigen, Clustering, ImmuneClustering,
                     IterationStats, Repertoire, antigens_from_vectors,
                     clone_and_mutate, extract_clusters, init_repertoire,
                     match, normalized_affinity, run_ais, suppress)
from .ngrams import (NgramCountVectorizer, NormalizationOptions, TermDocMatrix,
                     Vocabulary, build_matrix, extract_ngrams, normalize_text)
from .pipeline import PipelineError, RunResult, SweepRow, run_pipeline, sweep
from .similarity import (Metric, SimilarityMatrix, closeness, cosine_similarity,
                         distance, minkowski_distance, similarity_matrix)

__version__ = "0.1.0"

__all__ = [
    "AISParams", "Antibody", "Antigen", "Chi2Table", "ChiSquareTermSelector",
    "Clustering", "ConfusionCounts", "Document", "DocumentSet",
    "EvaluationReport", "ImmuneClustering", "IterationStats", "KMeansBaseline",
    "ManifestEntry", "Metric", "NgramCountVectorizer", "NormalizationOptions",
    "OUTPUT_ROOT_ENV", "PipelineError", "PurityResult", "Repertoire",
    "RunConfig", "RunResult", "SelectionResult", "SimilarityMatrix", "SweepRow",
    "TermDocMatrix", "TfcWeighter", "UNLABELED", "VectorSet", "Vocabulary",
    "WeightedMatrix", "antigens_from_vectors", "build_matrix", "chi2_scores",
    "clone_and_mutate", "closeness", "confusion", "cosine_similarity",
    "distance", "evaluate_clustering", "extract_clusters", "extract_ngrams",
    "f_measure", "init_repertoire", "kmeans_baseline", "load_config",
    "load_plaintext_dir", "load_sgml", "match", "minkowski_distance",
    "normalize_text", "normalized_affinity", "parse_config", "parse_sgml_corpus",
    "purity", "restrict_matrix", "run_ais", "run_pipeline", "sample_subset",
    "select_terms", "serialize_config", "similarity_matrix",
    "stirling_partitions", "suppress", "sweep", "tfc_normalize", "tfidf_weight",
]
