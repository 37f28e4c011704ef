"""Clonal-selection clustering.

Documents act as antigens; the algorithm maintains a repertoire of antibody
vectors in the same space. Each pass presents every antigen in order: the
antibodies close enough to it (threshold ``affinity_threshold``) are cloned
in proportion to how well they match, clones are perturbed with noise that
shrinks as the match improves, and the grown repertoire is thinned by a
suppression step that removes antibodies sitting within
``suppression_threshold`` of a stronger one. The loop stops when the
repertoire size has been stable for ``stall_window`` passes or after
``max_iterations``. Surviving antibodies linked within the suppression
radius form the clusters; every antigen joins the cluster of its nearest
antibody.

Affinities are normalized to [0, 1] before driving clone counts: the cosine
similarity is used as is, a distance d becomes 1 / (1 + d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from ._validation import check_int, check_matrix, check_real, check_vector
from .similarity import Metric, distance

DEFAULT_COSINE_THRESHOLD = 0.90
DEFAULT_DISTANCE_THRESHOLD = 0.75


@dataclass(frozen=True)
class Antigen:
    doc_id: str
    vector: np.ndarray


@dataclass
class Antibody:
    """One repertoire member.

    ``stimulation`` counts antigen matches since creation, ``age`` counts
    survived iterations, ``lineage`` is the founder index the antibody
    descends from.
    """

    vector: np.ndarray
    stimulation: int = 0
    age: int = 0
    lineage: int = 0


class IterationStats(NamedTuple):
    size: int
    matches: int
    clones: int
    suppressed: int


@dataclass
class Repertoire:
    antibodies: list[Antibody]
    iteration: int = 0
    history: list[IterationStats] = field(default_factory=list)

    def __len__(self):
        return len(self.antibodies)

    def vectors(self):
        return np.array([a.vector for a in self.antibodies], dtype=np.float64)


@dataclass(frozen=True)
class AISParams:
    """Hyperparameters for one clustering run.

    ``affinity_threshold`` and ``initial_repertoire_size`` may be left unset;
    :meth:`resolved` fills in the defaults (0.90 for cosine, 0.75 for the
    distance metrics; one founder per ten antigens with a floor of ten).
    """

    metric: Metric = Metric.COSINE
    affinity_threshold: float | None = None
    clone_budget: int = 5
    mutation_scale: float = 0.1
    suppression_threshold: float = 0.15
    max_iterations: int = 50
    stall_window: int = 5
    initial_repertoire_size: int | None = None
    seed: int = 0

    def resolved(self, antigen_count):
        metric = Metric.coerce(self.metric)
        threshold = self.affinity_threshold
        if threshold is None:
            threshold = (DEFAULT_COSINE_THRESHOLD if metric is Metric.COSINE
                         else DEFAULT_DISTANCE_THRESHOLD)
        size = self.initial_repertoire_size
        if size is None:
            size = max(10, antigen_count // 10)
        params = replace(self, metric=metric, affinity_threshold=threshold,
                         initial_repertoire_size=size)
        params.validate()
        return params

    def validate(self):
        metric = Metric.coerce(self.metric)
        if self.affinity_threshold is not None:
            if metric is Metric.COSINE:
                check_real(self.affinity_threshold, "affinity_threshold",
                           strict_min=0.0, maximum=1.0)
            else:
                check_real(self.affinity_threshold, "affinity_threshold",
                           strict_min=0.0)
        check_int(self.clone_budget, "clone_budget", minimum=0)
        check_real(self.mutation_scale, "mutation_scale", minimum=0.0)
        check_real(self.suppression_threshold, "suppression_threshold", minimum=0.0)
        check_int(self.max_iterations, "max_iterations", minimum=1)
        check_int(self.stall_window, "stall_window", minimum=1)
        if self.initial_repertoire_size is not None:
            check_int(self.initial_repertoire_size, "initial_repertoire_size",
                      minimum=1)
        check_int(self.seed, "seed")


def antigens_from_vectors(vector_set):
    """Non-excluded documents of a VectorSet as antigens, in document order."""
    excluded = set(vector_set.excluded_docs)
    return [Antigen(doc_id=d, vector=np.asarray(v, dtype=np.float64))
            for d, v in zip(vector_set.doc_ids, vector_set.vectors)
            if d not in excluded]


def normalized_affinity(metric, value):
    """Map a raw metric value into [0, 1], higher meaning a better match."""
    metric = Metric.coerce(metric)
    if metric is Metric.COSINE:
        return min(max(float(value), 0.0), 1.0)
    return 1.0 / (1.0 + float(value))


def clone_noise_scale(params, affinity):
    """Per-coordinate mutation noise: shrinks to zero as the match improves."""
    affinity = min(max(float(affinity), 0.0), 1.0)
    return params.mutation_scale * (1.0 - affinity)


def init_repertoire(antigens, params, rng=None):
    """Seed the repertoire with jittered copies of sampled antigens.

    Samples ``initial_repertoire_size`` antigens uniformly, without
    replacement while possible, and perturbs every coordinate with Gaussian
    noise of scale ``mutation_scale``. Fully determined by ``params.seed``
    unless a generator is passed in.
    """
    antigens = list(antigens)
    if not antigens:
        raise ValueError("cannot initialize a repertoire with no antigens")
    params = params.resolved(len(antigens))
    if rng is None:
        rng = np.random.default_rng(params.seed)
    size = params.initial_repertoire_size
    picks = rng.choice(len(antigens), size=size, replace=size > len(antigens))
    antibodies = []
    for founder_index, pick in enumerate(picks):
        base = check_vector(antigens[int(pick)].vector, "antigen vector")
        noise = rng.normal(0.0, params.mutation_scale, size=base.shape)
        antibodies.append(Antibody(vector=base + noise, lineage=founder_index))
    return Repertoire(antibodies=antibodies)


def match(antibody, antigen, params):
    """Does the antibody bind this antigen under the run's threshold?"""
    value = distance(params.metric, antibody.vector, antigen.vector)
    if Metric.coerce(params.metric) is Metric.COSINE:
        return value >= params.affinity_threshold
    return value <= params.affinity_threshold


def clone_and_mutate(antibody, affinity, params, rng):
    """Produce ``ceil(clone_budget * affinity)`` perturbed copies.

    Clones inherit the parent's lineage and start with zero stimulation and
    age; their coordinates get Gaussian noise of scale
    ``mutation_scale * (1 - affinity)``, so a perfect match clones exactly.
    The parent's stimulation counter increments.
    """
    affinity = min(max(float(affinity), 0.0), 1.0)
    n_clones = math.ceil(params.clone_budget * affinity)
    scale = clone_noise_scale(params, affinity)
    clones = []
    for _ in range(n_clones):
        noise = rng.normal(0.0, scale, size=antibody.vector.shape)
        clones.append(Antibody(vector=antibody.vector + noise,
                               lineage=antibody.lineage))
    antibody.stimulation += 1
    return clones


def _value_columns(metric, matrix, vector):
    """Raw metric values between every matrix row and one vector."""
    if metric is Metric.COSINE:
        norms = np.linalg.norm(matrix, axis=1)
        vnorm = np.linalg.norm(vector)
        values = np.zeros(matrix.shape[0])
        nz = norms > 0
        if vnorm > 0:
            values[nz] = (matrix[nz] @ vector) / (norms[nz] * vnorm)
        return values
    diff = matrix - vector
    if metric is Metric.EUCLIDEAN:
        return np.sqrt(np.sum(diff * diff, axis=1))
    return np.sum(diff ** 4, axis=1) ** 0.25


def _closeness_columns(metric, matrix, vector):
    values = _value_columns(metric, matrix, vector)
    return 1.0 - values if metric is Metric.COSINE else values


def _priority_order(antibodies):
    """Greedy order: most stimulated first, then oldest, then first inserted."""
    return sorted(range(len(antibodies)),
                  key=lambda i: (-antibodies[i].stimulation, -antibodies[i].age, i))


def suppress(repertoire, params):
    """Thin the repertoire so survivors are pairwise farther than the radius.

    A single greedy pass in priority order keeps an antibody only if its
    distance (``1 - cosine`` under the cosine metric) to every antibody kept
    so far exceeds ``suppression_threshold``. Survivors keep their insertion
    order. Idempotent: a suppressed repertoire passes through unchanged.
    """
    metric = Metric.coerce(params.metric)
    antibodies = repertoire.antibodies
    if not antibodies:
        return Repertoire(antibodies=[], iteration=repertoire.iteration,
                          history=list(repertoire.history))
    kept_indices = []
    kept_vectors = []
    for i in _priority_order(antibodies):
        if kept_vectors:
            close = _closeness_columns(metric, np.array(kept_vectors),
                                       antibodies[i].vector)
            if not (close > params.suppression_threshold).all():
                continue
        kept_indices.append(i)
        kept_vectors.append(antibodies[i].vector)
    kept_indices.sort()
    return Repertoire(antibodies=[antibodies[i] for i in kept_indices],
                      iteration=repertoire.iteration,
                      history=list(repertoire.history))


class _VectorStack:
    """Growable row matrix with cached norms, so the presentation loop can
    compare one antigen against the whole repertoire in a single pass."""

    def __init__(self, dim, capacity=64):
        self._arr = np.empty((capacity, dim), dtype=np.float64)
        self._norms = np.empty(capacity, dtype=np.float64)
        self.n = 0

    @property
    def view(self):
        return self._arr[:self.n]

    @property
    def norms(self):
        return self._norms[:self.n]

    def append(self, vector):
        if self.n == self._arr.shape[0]:
            self._arr = np.concatenate([self._arr, np.empty_like(self._arr)])
            self._norms = np.concatenate([self._norms, np.empty_like(self._norms)])
        self._arr[self.n] = vector
        self._norms[self.n] = np.linalg.norm(vector)
        self.n += 1

    def compact(self, keep):
        m = len(keep)
        self._arr[:m] = self._arr[keep]
        self._norms[:m] = self._norms[keep]
        self.n = m


def _metric_values_fast(metric, stack, vector, vnorm):
    if metric is Metric.COSINE:
        values = np.zeros(stack.n)
        nz = stack.norms > 0
        if vnorm > 0:
            values[nz] = (stack.view[nz] @ vector) / (stack.norms[nz] * vnorm)
        return values
    diff = stack.view - vector
    if metric is Metric.EUCLIDEAN:
        return np.sqrt(np.sum(diff * diff, axis=1))
    return np.sum(diff ** 4, axis=1) ** 0.25


def run_ais(antigens, params):
    """Run the clonal-selection loop. Returns ``(repertoire, history)``.

    Presentation order is document order. Clones created while presenting an
    antigen are deferred: they cannot match that same antigen, but are live
    from the next presentation on. Suppression runs right after each
    presentation that produced clones. After each full sweep every survivor
    ages by one and a history entry records (size, matches, clones,
    suppressed). Deterministic: the same antigens, params and seed give an
    identical run.
    """
    antigens = list(antigens)
    if not antigens:
        raise ValueError("cannot run with no antigens")
    params = params.resolved(len(antigens))
    metric = Metric.coerce(params.metric)
    rng = np.random.default_rng(params.seed)

    repertoire = init_repertoire(antigens, params, rng=rng)
    antibodies = repertoire.antibodies
    dim = antibodies[0].vector.shape[0]
    stack = _VectorStack(dim, capacity=max(64, 2 * len(antibodies)))
    for ab in antibodies:
        stack.append(ab.vector)

    antigen_vectors = [check_vector(a.vector, f"antigen {a.doc_id}") for a in antigens]
    antigen_norms = [np.linalg.norm(v) for v in antigen_vectors]

    history = []
    # Until the first real suppression pass the founders may sit arbitrarily
    # close together, so the first pass must order the whole repertoire. From
    # then on survivors are pairwise separated and outrank any fresh clone
    # (clones start at stimulation 0, age 0, and are inserted last), so a
    # greedy pass only ever has to filter the new tail. That shortcut is
    # exercised against the full pass in the tests.
    separated = False
    stall = 0
    iteration = 0

    while iteration < params.max_iterations:
        iteration += 1
        n_matches = 0
        n_clones = 0
        n_suppressed = 0
        for vector, vnorm in zip(antigen_vectors, antigen_norms):
            values = _metric_values_fast(metric, stack, vector, vnorm)
            if metric is Metric.COSINE:
                matched = np.flatnonzero(values >= params.affinity_threshold)
            else:
                matched = np.flatnonzero(values <= params.affinity_threshold)
            if matched.size == 0:
                continue
            n_matches += int(matched.size)
            new_clones = []
            for idx in matched:
                affinity = normalized_affinity(metric, values[idx])
                new_clones.extend(clone_and_mutate(antibodies[idx], affinity,
                                                   params, rng))
            if not new_clones:
                continue
            first_new = len(antibodies)
            for clone in new_clones:
                antibodies.append(clone)
                stack.append(clone.vector)
            n_clones += len(new_clones)

            if separated:
                keep = list(range(first_new))
                for t in range(first_new, len(antibodies)):
                    close = _closeness_columns(metric, stack.view[keep],
                                               antibodies[t].vector)
                    if (close > params.suppression_threshold).all():
                        keep.append(t)
            else:
                keep = []
                for i in _priority_order(antibodies):
                    if keep:
                        close = _closeness_columns(metric, stack.view[keep],
                                                   antibodies[i].vector)
                        if not (close > params.suppression_threshold).all():
                            continue
                    keep.append(i)
                keep.sort()
                separated = True
            n_suppressed += len(antibodies) - len(keep)
            if len(keep) != len(antibodies):
                antibodies[:] = [antibodies[i] for i in keep]
                stack.compact(keep)

        for ab in antibodies:
            ab.age += 1
        entry = IterationStats(size=len(antibodies), matches=n_matches,
                               clones=n_clones, suppressed=n_suppressed)
        history.append(entry)

        if len(history) >= 2 and history[-1].size == history[-2].size:
            stall += 1
        else:
            stall = 0
        if stall >= params.stall_window:
            break

    repertoire = Repertoire(antibodies=antibodies, iteration=iteration,
                            history=history)
    return repertoire, history


@dataclass
class Clustering:
    """A hard assignment of documents to clusters.

    ``assignment`` maps document id to cluster id; ``centers`` maps each
    assigned cluster id to a representative vector; ``num_clusters`` counts
    the distinct assigned ids.
    """

    assignment: dict[str, int]
    centers: dict[int, np.ndarray]
    num_clusters: int


def extract_clusters(repertoire, antigens, params):
    """Read a clustering out of the final repertoire.

    Antibodies within the suppression radius of each other are linked into
    components (components are numbered by their first antibody in insertion
    order). Every antigen joins the component of its nearest antibody, ties
    going to the lower component id. Components that attract no antigen are
    dropped. Each kept component is represented by its highest-priority
    antibody's vector.
    """
    antigens = list(antigens)
    params = params.resolved(max(len(antigens), 1))
    metric = Metric.coerce(params.metric)
    antibodies = repertoire.antibodies
    if not antibodies:
        raise ValueError("repertoire has no antibodies")
    if not antigens:
        raise ValueError("no antigens to assign")

    vectors = repertoire.vectors()
    n = len(antibodies)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        close = _closeness_columns(metric, vectors[i + 1:], vectors[i])
        for off in np.flatnonzero(close <= params.suppression_threshold):
            a, b = find(i), find(i + 1 + int(off))
            if a != b:
                parent[max(a, b)] = min(a, b)

    component_of = {}
    component_ids = {}
    for i in range(n):
        root = find(i)
        if root not in component_ids:
            component_ids[root] = len(component_ids)
        component_of[i] = component_ids[root]

    assignment = {}
    for antigen in antigens:
        close = _closeness_columns(metric, vectors, antigen.vector)
        best = min(range(n), key=lambda i: (close[i], component_of[i]))
        assignment[antigen.doc_id] = component_of[best]

    assigned = sorted(set(assignment.values()))
    centers = {}
    for comp in assigned:
        members = [i for i in range(n) if component_of[i] == comp]
        rep = min(members, key=lambda i: (-antibodies[i].stimulation,
                                          -antibodies[i].age, i))
        centers[comp] = antibodies[rep].vector.copy()
    return Clustering(assignment=assignment, centers=centers,
                      num_clusters=len(assigned))


class ImmuneClustering(BaseEstimator, ClusterMixin):
    """scikit-learn face of the clonal-selection clusterer.

    ``fit`` expects a documents-by-features array (unit rows work best along
    with the cosine metric) and exposes ``labels_`` with dense cluster ids,
    plus ``n_clusters_``, ``history_`` and the final ``repertoire_``.
    """

    def __init__(self, metric="cosine", affinity_threshold=None, clone_budget=5,
                 mutation_scale=0.1, suppression_threshold=0.15,
                 max_iterations=50, stall_window=5,
                 initial_repertoire_size=None, random_state=0):
        self.metric = metric
        self.affinity_threshold = affinity_threshold
        self.clone_budget = clone_budget
        self.mutation_scale = mutation_scale
        self.suppression_threshold = suppression_threshold
        self.max_iterations = max_iterations
        self.stall_window = stall_window
        self.initial_repertoire_size = initial_repertoire_size
        self.random_state = random_state

    def _params(self):
        return AISParams(metric=Metric.coerce(self.metric),
                         affinity_threshold=self.affinity_threshold,
                         clone_budget=self.clone_budget,
                         mutation_scale=self.mutation_scale,
                         suppression_threshold=self.suppression_threshold,
                         max_iterations=self.max_iterations,
                         stall_window=self.stall_window,
                         initial_repertoire_size=self.initial_repertoire_size,
                         seed=self.random_state)

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        antigens = [Antigen(doc_id=str(i), vector=row) for i, row in enumerate(X)]
        params = self._params().resolved(len(antigens))
        repertoire, history = run_ais(antigens, params)
        clustering = extract_clusters(repertoire, antigens, params)
        ids = sorted(set(clustering.assignment.values()))
        dense = {c: k for k, c in enumerate(ids)}
        self.labels_ = np.array([dense[clustering.assignment[str(i)]]
                                 for i in range(X.shape[0])], dtype=np.int64)
        self.n_clusters_ = clustering.num_clusters
        self.cluster_centers_ = np.array([clustering.centers[c] for c in ids])
        self.history_ = history
        self.repertoire_ = repertoire
        return self
