"""End-to-end run orchestration: corpus to clusters to report files.

``run_pipeline`` wires the stages together (load, count grams, reduce terms,
weight, cluster, evaluate) and writes four artifacts into the output
directory: ``assignments.tsv``, ``report.txt``, ``resolved_config.cfg`` and,
on request, debug CSV dumps. ``sweep`` repeats a run over a grid of gram
sizes and metrics and collects one summary row per cell.

Any stage failure is wrapped in :class:`PipelineError` carrying the stage
name, so callers can say where a run died without parsing tracebacks.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import os
import time
from dataclasses import dataclass

from .config import OUTPUT_ROOT_ENV, RunConfig, serialize_config
from .corpus import UNLABELED, load_plaintext_dir, load_sgml, sample_subset
from .evaluation import evaluate_clustering, kmeans_baseline
from .features import (chi2_scores, restrict_matrix, select_terms, tfc_normalize,
                       tfidf_weight)
from .immune import AISParams, antigens_from_vectors, extract_clusters, run_ais
from .ngrams import NormalizationOptions, build_matrix
from .similarity import Metric, similarity_matrix

log = logging.getLogger(__name__)


class PipelineError(Exception):
    """A stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunResult:
    config: RunConfig
    out_dir: str
    num_documents: int
    num_excluded: int
    selection: object
    clustering: object
    history: list
    clustering_ms: float
    report: object | None
    paths: dict[str, str]


def default_out_dir(config):
    root = os.environ.get(OUTPUT_ROOT_ENV, "runs")
    algo = f"kmeans{config.baseline_kmeans}" if config.baseline_kmeans else "ais"
    return os.path.join(root, f"run-n{config.n}-{config.metric}-{algo}-seed{config.seed}")


def _load_corpus(config):
    if config.format == "sgml":
        docs = load_sgml(config.corpus)
    else:
        docs = load_plaintext_dir(config.corpus)
    if config.per_source is not None:
        docs = sample_subset(docs, config.per_source, config.seed)
    if len(docs) == 0:
        raise ValueError("corpus produced no documents")
    return docs


def _ais_params(config):
    return AISParams(metric=Metric.coerce(config.metric),
                     affinity_threshold=config.affinity_threshold,
                     clone_budget=config.clone_budget,
                     mutation_scale=config.mutation_scale,
                     suppression_threshold=config.suppression_threshold,
                     max_iterations=config.max_iterations,
                     stall_window=config.stall_window,
                     initial_repertoire_size=config.repertoire_size,
                     seed=config.seed)


def _write_assignments(path, clustering):
    lines = [f"{doc_id}\t{cluster}" for doc_id, cluster
             in clustering.assignment.items()]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_report(path, config, docs, selection, vector_set, clustering,
                  history, clustering_ms, report):
    out = []
    labeled = sum(1 for d in docs if d.label != UNLABELED)
    out.append(f"corpus: {config.corpus} (format={config.format})")
    out.append(f"documents: {len(docs)} labeled={labeled} "
               f"excluded={len(vector_set.excluded_docs)}")
    out.append("")
    out.append("source manifest:")
    for entry in docs.source_manifest:
        out.append(f"  {entry.source}: read={entry.records_read} "
                   f"skipped={entry.records_skipped}")
        for rid, reason in entry.skips:
            out.append(f"    skip {rid}: {reason}")
        for note in entry.notes:
            out.append(f"    note: {note}")
    out.append("")
    rate = selection.reduction_rate
    out.append("term reduction:")
    out.append(f"  grams={config.n} before={selection.n_before} "
               f"after={selection.n_after} rate={rate * 100:.2f}%")
    out.append("")
    algo = (f"kmeans(k={config.baseline_kmeans})" if config.baseline_kmeans
            else "immune")
    out.append(f"clustering: algorithm={algo} metric={config.metric} "
               f"seed={config.seed}")
    f_pct = f"{report.f_measure * 100:.2f}" if report else "n/a"
    out.append(f"  grams={config.n} classes={clustering.num_clusters} "
               f"time_ms={clustering_ms:.1f} f_measure_pct={f_pct}")
    if history:
        out.append("  immune history (iteration, size, matches, clones, suppressed):")
        for i, entry in enumerate(history, start=1):
            out.append(f"    {i} {entry.size} {entry.matches} {entry.clones} "
                       f"{entry.suppressed}")
    out.append("")
    if report:
        out.append(f"evaluation: f_measure={report.f_measure:.4f} "
                   f"beta={report.beta:g} purity={report.purity_weighted:.4f}")
        out.append("  per-class best cluster (label, size, cluster, precision, "
                   "recall, f):")
        for row in report.per_class:
            out.append(f"    {row.label} {row.size} {row.best_cluster} "
                       f"{row.precision:.4f} {row.recall:.4f} {row.f:.4f}")
        out.append("  purity per cluster:")
        for cluster in sorted(report.purity_per_cluster):
            out.append(f"    {cluster}: {report.purity_per_cluster[cluster]:.4f}")
        if report.excluded_unlabeled:
            out.append(f"  unlabeled documents left out of evaluation: "
                       f"{len(report.excluded_unlabeled)}")
    else:
        out.append("evaluation: skipped (no labeled documents)")
    if vector_set.excluded_docs:
        out.append("")
        out.append("excluded documents (no grams or zero weight vector):")
        for doc_id in vector_set.excluded_docs:
            out.append(f"  {doc_id}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def _dump_counts(path, matrix):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "doc_id", "count"])
        coo = matrix.counts.tocoo()
        cells = sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))
        for i, j, value in cells:
            writer.writerow([matrix.vocabulary.terms[i], matrix.doc_ids[j], value])


def _dump_terms(path, selection, table):
    best = table.scores[selection.row_indices].max(axis=1)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "max_chi2"])
        for term, score in zip(selection.vocabulary.terms, best):
            writer.writerow([term, f"{score:.6g}"])


def _dump_similarity(path, sim):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", *sim.doc_index])
        for doc_id, row in zip(sim.doc_index, sim.values):
            writer.writerow([doc_id, *(f"{v:.10g}" for v in row)])


def _dump_centers(path, clustering):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster", "vector"])
        for cluster in sorted(clustering.centers):
            vec = " ".join(f"{v:.10g}" for v in clustering.centers[cluster])
            writer.writerow([cluster, vec])


def run_pipeline(config, dump_counts=False, dump_terms=False,
                 dump_similarity=False, dump_centers=False):
    """Execute one configured run and write its artifacts.

    Returns a :class:`RunResult`. Raises :class:`PipelineError` with the
    failing stage's name on any error.
    """

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, exc) from exc

    config = stage("config", lambda: dataclasses.replace(config).validate())
    out_dir = config.out or default_out_dir(config)
    os.makedirs(out_dir, exist_ok=True)

    docs = stage("corpus", _load_corpus, config)
    options = NormalizationOptions(fold_case=config.fold_case,
                                   strip_punctuation=config.strip_punctuation)
    _, matrix = stage("ngrams", build_matrix, docs, config.n, options)
    table = stage("features", chi2_scores, matrix)
    selection = stage("features", select_terms, matrix, table, config.k_per_doc)
    reduced = stage("features", restrict_matrix, matrix, selection)
    weighted = stage("features", tfidf_weight, reduced)
    vector_set = stage("features", tfc_normalize, weighted)

    def cluster():
        if config.baseline_kmeans is not None:
            t0 = time.perf_counter()
            clustering = kmeans_baseline(vector_set, config.baseline_kmeans,
                                         seed=config.seed)
            return clustering, [], (time.perf_counter() - t0) * 1000.0
        antigens = antigens_from_vectors(vector_set)
        params = _ais_params(config)
        t0 = time.perf_counter()
        repertoire, history = run_ais(antigens, params)
        clustering = extract_clusters(repertoire, antigens, params)
        return clustering, history, (time.perf_counter() - t0) * 1000.0

    clustering, history, clustering_ms = stage("clustering", cluster)

    labels = docs.labels()
    any_labeled = any(lbl != UNLABELED for lbl in labels.values())
    report = None
    if any_labeled:
        report = stage("evaluation", evaluate_clustering, clustering, labels,
                       config.beta)

    paths = {"assignments": os.path.join(out_dir, "assignments.tsv"),
             "report": os.path.join(out_dir, "report.txt"),
             "config": os.path.join(out_dir, "resolved_config.cfg")}
    stage("write", _write_assignments, paths["assignments"], clustering)
    stage("write", _write_report, paths["report"], config, docs, selection,
          vector_set, clustering, history, clustering_ms, report)
    resolved = dataclasses.replace(config, out=out_dir)
    with open(paths["config"], "w", encoding="utf-8") as fh:
        fh.write(serialize_config(resolved))

    if dump_counts:
        paths["counts"] = os.path.join(out_dir, "counts.csv")
        stage("write", _dump_counts, paths["counts"], matrix)
    if dump_terms:
        paths["terms"] = os.path.join(out_dir, "selected_terms.csv")
        stage("write", _dump_terms, paths["terms"], selection, table)
    if dump_similarity:
        paths["similarity"] = os.path.join(out_dir, "similarity.csv")
        sim = stage("similarity", similarity_matrix, vector_set, config.metric)
        stage("write", _dump_similarity, paths["similarity"], sim)
    if dump_centers:
        paths["centers"] = os.path.join(out_dir, "centers.csv")
        stage("write", _dump_centers, paths["centers"], clustering)

    return RunResult(config=config, out_dir=out_dir, num_documents=len(docs),
                     num_excluded=len(vector_set.excluded_docs),
                     selection=selection, clustering=clustering,
                     history=history, clustering_ms=clustering_ms,
                     report=report, paths=paths)


@dataclass
class SweepRow:
    n: int
    metric: str
    status: str
    num_clusters: int | None
    clustering_ms: float | None
    f_measure_pct: float | None
    error: str = ""


def sweep(config, grams=(2, 3, 4, 5), metrics=("euclidean", "minkowski4", "cosine")):
    """Run the pipeline over a grid of gram sizes and metrics.

    Each cell writes its artifacts under ``<out>/sweep-n<g>-<metric>/``. A
    failing cell is recorded with its error and the sweep moves on. Returns
    the rows and writes ``sweep.csv`` under the output root.
    """
    root = config.out or default_out_dir(dataclasses.replace(config, out=None))
    os.makedirs(root, exist_ok=True)
    rows = []
    for n in grams:
        for metric in metrics:
            cell = dataclasses.replace(
                config, n=n, metric=metric,
                out=os.path.join(root, f"sweep-n{n}-{metric}"))
            try:
                result = run_pipeline(cell)
                f_pct = (result.report.f_measure * 100.0
                         if result.report else None)
                rows.append(SweepRow(n=n, metric=metric, status="ok",
                                     num_clusters=result.clustering.num_clusters,
                                     clustering_ms=result.clustering_ms,
                                     f_measure_pct=f_pct))
            except Exception as exc:
                log.warning("sweep cell n=%s metric=%s failed: %s", n, metric, exc)
                rows.append(SweepRow(n=n, metric=metric, status="error",
                                     num_clusters=None, clustering_ms=None,
                                     f_measure_pct=None, error=str(exc)))
    csv_path = os.path.join(root, "sweep.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grams", "metric", "status", "classes",
                         "clustering_time_ms", "f_measure_pct", "error"])
        for row in rows:
            writer.writerow([
                row.n, row.metric, row.status,
                "" if row.num_clusters is None else row.num_clusters,
                "" if row.clustering_ms is None else f"{row.clustering_ms:.1f}",
                "" if row.f_measure_pct is None else f"{row.f_measure_pct:.2f}",
                row.error,
            ])
    return rows, csv_path
