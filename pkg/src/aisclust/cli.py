"""Command line entry points.

Two subcommands:

* ``aisclust run`` executes one configured pipeline run;
* ``aisclust sweep`` crosses gram sizes with metrics and writes a CSV table.

Options may come from a ``--config`` key=value file, from flags (flags win),
or from defaults. The default output root is the ``AISCLUST_OUT``
environment variable, falling back to ``./runs``.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import RunConfig, load_config
from .pipeline import PipelineError, run_pipeline, sweep


def _add_shared_options(parser):
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--corpus", help="corpus path (file or directory)")
    parser.add_argument("--format", choices=["sgml", "plaintext"],
                        help="corpus format (default sgml)")
    parser.add_argument("--per-source", type=int, dest="per_source",
                        help="sample up to this many documents per source file")
    parser.add_argument("--k-per-doc", type=int, dest="k_per_doc",
                        help="grams kept per document in the chi-square screen")
    parser.add_argument("--seed", type=int, help="random seed for the whole run")
    parser.add_argument("--out", help="output directory (or root, for sweep)")
    parser.add_argument("--allow-unigrams", action="store_true", default=None,
                        dest="allow_unigrams", help="permit n=1")
    parser.add_argument("--affinity-threshold", type=float, dest="affinity_threshold")
    parser.add_argument("--clone-budget", type=int, dest="clone_budget")
    parser.add_argument("--mutation-scale", type=float, dest="mutation_scale")
    parser.add_argument("--suppression-threshold", type=float,
                        dest="suppression_threshold")
    parser.add_argument("--max-iterations", type=int, dest="max_iterations")
    parser.add_argument("--stall-window", type=int, dest="stall_window")
    parser.add_argument("--repertoire-size", type=int, dest="repertoire_size")
    parser.add_argument("--beta", type=float, help="F-measure beta (default 1)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aisclust",
        description="Immune-inspired document clustering over character n-grams")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the pipeline once")
    _add_shared_options(run_p)
    run_p.add_argument("--n", type=int, help="gram length (2-5)")
    run_p.add_argument("--metric", choices=["euclidean", "minkowski4", "cosine"])
    run_p.add_argument("--baseline-kmeans", type=int, dest="baseline_kmeans",
                       metavar="K", help="cluster with k-means instead of the "
                       "immune algorithm")
    run_p.add_argument("--dump-counts", action="store_true",
                       help="write the gram counts as CSV")
    run_p.add_argument("--dump-terms", action="store_true",
                       help="write the reduced vocabulary with chi-square scores")
    run_p.add_argument("--dump-similarity", action="store_true",
                       help="write the document similarity matrix as CSV")
    run_p.add_argument("--dump-centers", action="store_true",
                       help="write the final cluster centers as CSV")

    sweep_p = sub.add_parser("sweep", help="cross gram sizes with metrics")
    _add_shared_options(sweep_p)
    sweep_p.add_argument("--grams", default="2,3,4,5",
                         help="comma-separated gram sizes (default 2,3,4,5)")
    sweep_p.add_argument("--metrics", default="euclidean,minkowski4,cosine",
                         help="comma-separated metrics")
    return parser


_CONFIG_KEYS = [f.name for f in dataclasses.fields(RunConfig)]


def _config_from_args(args):
    if args.config:
        config = load_config(args.config)
    else:
        config = RunConfig()
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "run":
            result = run_pipeline(config,
                                  dump_counts=args.dump_counts,
                                  dump_terms=args.dump_terms,
                                  dump_similarity=args.dump_similarity,
                                  dump_centers=args.dump_centers)
            print(f"documents: {result.num_documents} "
                  f"(excluded {result.num_excluded})")
            print(f"terms: {result.selection.n_before} -> "
                  f"{result.selection.n_after} "
                  f"(reduction {result.selection.reduction_rate * 100:.2f}%)")
            f_pct = (f"{result.report.f_measure * 100:.2f}%"
                     if result.report else "n/a")
            print(f"clusters: {result.clustering.num_clusters} "
                  f"time_ms: {result.clustering_ms:.1f} f_measure: {f_pct}")
            print(f"output: {result.out_dir}")
        else:
            grams = [int(g) for g in args.grams.split(",") if g.strip()]
            metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
            rows, csv_path = sweep(config, grams=grams, metrics=metrics)
            for row in rows:
                if row.status == "ok":
                    f_pct = ("n/a" if row.f_measure_pct is None
                             else f"{row.f_measure_pct:.2f}%")
                    print(f"n={row.n} metric={row.metric} "
                          f"classes={row.num_clusters} "
                          f"time_ms={row.clustering_ms:.1f} f={f_pct}")
                else:
                    print(f"n={row.n} metric={row.metric} ERROR: {row.error}")
            print(f"table: {csv_path}")
    except PipelineError as exc:
        print(f"pipeline failed at stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
