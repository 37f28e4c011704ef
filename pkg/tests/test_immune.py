"""Tests for the clonal-selection clustering loop and its building blocks."""

import math

import numpy as np
import pytest

from aisclust import (
    AISParams,
    Antibody,
    Antigen,
    ImmuneClustering,
    IterationStats,
    Repertoire,
    clone_and_mutate,
    cosine_similarity,
    extract_clusters,
    init_repertoire,
    match,
    run_ais,
    suppress,
)
from aisclust.immune import (
    _closeness_columns,
    _priority_order,
    normalized_affinity,
)
from aisclust.similarity import Metric, closeness, distance

from conftest import blob_antigens, make_blobs


def point_antigens(points, prefix="g"):
    return [Antigen(doc_id=f"{prefix}{i}", vector=np.asarray(p, dtype=np.float64))
            for i, p in enumerate(points)]


def reference_run(antigens, params):
    """Slow mirror of the presentation loop.

    Identical contract, but suppression is always a full greedy pass over the
    whole repertoire in priority order — no shortcut for already-separated
    survivors. Consumes the seeded generator in exactly the same order, so
    the production loop must reproduce it bit for bit.
    """
    antigens = list(antigens)
    params = params.resolved(len(antigens))
    metric = Metric.coerce(params.metric)
    rng = np.random.default_rng(params.seed)
    repertoire = init_repertoire(antigens, params, rng=rng)
    antibodies = repertoire.antibodies
    history = []
    stall = 0
    iteration = 0
    while iteration < params.max_iterations:
        iteration += 1
        n_matches = n_clones = n_suppressed = 0
        for antigen in antigens:
            values = [distance(metric, ab.vector, antigen.vector)
                      for ab in antibodies]
            if metric is Metric.COSINE:
                matched = [i for i, v in enumerate(values)
                           if v >= params.affinity_threshold]
            else:
                matched = [i for i, v in enumerate(values)
                           if v <= params.affinity_threshold]
            if not matched:
                continue
            n_matches += len(matched)
            new = []
            for idx in matched:
                affinity = normalized_affinity(metric, values[idx])
                new.extend(clone_and_mutate(antibodies[idx], affinity, params, rng))
            if not new:
                continue
            antibodies.extend(new)
            n_clones += len(new)
            keep = []
            for i in _priority_order(antibodies):
                if keep:
                    kept = np.array([antibodies[j].vector for j in keep])
                    close = _closeness_columns(metric, kept, antibodies[i].vector)
                    if not (close > params.suppression_threshold).all():
                        continue
                keep.append(i)
            keep.sort()
            n_suppressed += len(antibodies) - len(keep)
            antibodies[:] = [antibodies[i] for i in keep]
        for ab in antibodies:
            ab.age += 1
        history.append(IterationStats(size=len(antibodies), matches=n_matches,
                                      clones=n_clones, suppressed=n_suppressed))
        if len(history) >= 2 and history[-1].size == history[-2].size:
            stall += 1
        else:
            stall = 0
        if stall >= params.stall_window:
            break
    return antibodies, history


class TestParams:
    def test_cosine_threshold_default(self):
        params = AISParams().resolved(100)
        assert params.affinity_threshold == 0.90

    def test_distance_threshold_default(self):
        params = AISParams(metric="euclidean").resolved(100)
        assert params.affinity_threshold == 0.75

    def test_repertoire_size_default(self):
        assert AISParams().resolved(400).initial_repertoire_size == 40
        assert AISParams().resolved(30).initial_repertoire_size == 10

    def test_explicit_values_kept(self):
        params = AISParams(affinity_threshold=0.5,
                           initial_repertoire_size=7).resolved(400)
        assert params.affinity_threshold == 0.5
        assert params.initial_repertoire_size == 7

    @pytest.mark.parametrize("kwargs", [
        {"affinity_threshold": 1.5},
        {"affinity_threshold": 0.0},
        {"mutation_scale": -0.1},
        {"suppression_threshold": -1.0},
        {"clone_budget": -1},
        {"max_iterations": 0},
        {"stall_window": 0},
        {"initial_repertoire_size": 0},
    ])
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ValueError):
            AISParams(**kwargs).resolved(10)

    def test_distance_threshold_above_one_allowed(self):
        params = AISParams(metric="euclidean", affinity_threshold=1.5).resolved(10)
        assert params.affinity_threshold == 1.5


class TestInitRepertoire:
    def _antigens(self, n=400, dim=6, seed=0):
        rng = np.random.default_rng(seed)
        return point_antigens(rng.normal(size=(n, dim)))

    def test_same_seed_same_founders(self):
        antigens = self._antigens()
        params = AISParams(seed=5, initial_repertoire_size=3)
        a = init_repertoire(antigens, params)
        b = init_repertoire(antigens, params)
        assert len(a) == 3
        assert all(np.array_equal(x.vector, y.vector)
                   for x, y in zip(a.antibodies, b.antibodies))

    def test_zero_noise_founders_are_antigens(self):
        antigens = self._antigens(n=50)
        params = AISParams(seed=1, mutation_scale=0.0, initial_repertoire_size=10)
        rep = init_repertoire(antigens, params)
        pool = [a.vector for a in antigens]
        for ab in rep.antibodies:
            assert any(np.array_equal(ab.vector, v) for v in pool)

    def test_different_seeds_differ(self):
        antigens = self._antigens()
        a = init_repertoire(antigens, AISParams(seed=0))
        b = init_repertoire(antigens, AISParams(seed=1))
        assert not np.array_equal(a.vectors(), b.vectors())

    def test_oversized_repertoire_samples_with_replacement(self):
        antigens = self._antigens(n=4)
        params = AISParams(seed=2, mutation_scale=0.0, initial_repertoire_size=12)
        rep = init_repertoire(antigens, params)
        assert len(rep) == 12

    def test_no_antigens_rejected(self):
        with pytest.raises(ValueError):
            init_repertoire([], AISParams())


class TestMatch:
    def test_identical_cosine(self):
        v = np.array([0.6, 0.8])
        params = AISParams(affinity_threshold=0.9).resolved(1)
        assert match(Antibody(vector=v), Antigen(doc_id="g", vector=v), params)

    def test_orthogonal_cosine(self):
        params = AISParams(affinity_threshold=0.9).resolved(1)
        assert not match(Antibody(vector=np.array([1.0, 0.0])),
                         Antigen(doc_id="g", vector=np.array([0.0, 1.0])), params)

    def test_euclidean_threshold_sides(self):
        ab = Antibody(vector=np.array([0.0, 0.0]))
        ag = Antigen(doc_id="g", vector=np.array([0.5, 0.0]))
        tight = AISParams(metric="euclidean", affinity_threshold=0.4).resolved(1)
        loose = AISParams(metric="euclidean", affinity_threshold=0.6).resolved(1)
        assert not match(ab, ag, tight)
        assert match(ab, ag, loose)


class TestCloneAndMutate:
    def test_perfect_affinity_exact_copies(self):
        rng = np.random.default_rng(0)
        parent = Antibody(vector=np.array([1.0, 2.0]), lineage=4)
        clones = clone_and_mutate(parent, 1.0, AISParams().resolved(1), rng)
        assert len(clones) == 5
        for clone in clones:
            assert np.array_equal(clone.vector, parent.vector)
            assert clone.lineage == 4
            assert clone.stimulation == 0
            assert clone.age == 0
        assert parent.stimulation == 1

    def test_zero_affinity_no_clones(self):
        rng = np.random.default_rng(0)
        parent = Antibody(vector=np.array([1.0]))
        assert clone_and_mutate(parent, 0.0, AISParams().resolved(1), rng) == []
        assert parent.stimulation == 1

    def test_half_affinity_count_and_noise(self):
        rng = np.random.default_rng(0)
        parent = Antibody(vector=np.zeros(2000))
        params = AISParams(clone_budget=5, mutation_scale=0.1).resolved(1)
        clones = clone_and_mutate(parent, 0.5, params, rng)
        assert len(clones) == math.ceil(2.5)
        # Empirical noise scale over 3 * 2000 coordinates: sigma * (1 - a).
        spread = np.std(np.concatenate([c.vector for c in clones]))
        assert spread == pytest.approx(0.05, rel=0.1)

    def test_distance_affinity_normalization(self):
        assert normalized_affinity("euclidean", 0.0) == 1.0
        assert normalized_affinity("euclidean", 1.0) == 0.5
        assert normalized_affinity("cosine", 1.2) == 1.0
        assert normalized_affinity("cosine", -0.3) == 0.0


class TestSuppress:
    def _params(self, **kwargs):
        base = {"metric": "euclidean", "suppression_threshold": 0.15}
        base.update(kwargs)
        return AISParams(**base).resolved(10)

    def test_identical_pair_keeps_one(self):
        v = np.array([1.0, 0.0])
        rep = Repertoire(antibodies=[Antibody(vector=v.copy()),
                                     Antibody(vector=v.copy())])
        out = suppress(rep, self._params())
        assert len(out) == 1

    def test_separated_repertoire_unchanged(self):
        rep = Repertoire(antibodies=[Antibody(vector=np.array([0.0, 0.0])),
                                     Antibody(vector=np.array([1.0, 0.0])),
                                     Antibody(vector=np.array([0.0, 1.0]))])
        out = suppress(rep, self._params())
        assert len(out) == 3

    def test_higher_stimulation_wins(self):
        v = np.array([1.0, 0.0])
        rep = Repertoire(antibodies=[Antibody(vector=v.copy(), stimulation=1),
                                     Antibody(vector=v.copy(), stimulation=5)])
        out = suppress(rep, self._params())
        assert len(out) == 1
        assert out.antibodies[0].stimulation == 5

    def test_cosine_chain_keeps_endpoints(self):
        """a-b-c on the unit circle with closeness(a,b) = closeness(b,c) =
        sigma_s / 2: the greedy pass keeps a, removes b (too close to a) and
        keeps c, whose closeness to a exceeds the radius."""
        sigma = 0.15
        theta = math.acos(1.0 - sigma / 2)
        angles = [0.0, theta, 2 * theta]
        rep = Repertoire(antibodies=[
            Antibody(vector=np.array([math.cos(t), math.sin(t)])) for t in angles])
        params = self._params(metric="cosine", suppression_threshold=sigma)
        a, b, c = [ab.vector for ab in rep.antibodies]
        assert closeness("cosine", a, b) == pytest.approx(sigma / 2)
        assert closeness("cosine", b, c) == pytest.approx(sigma / 2)
        assert closeness("cosine", a, c) > sigma
        out = suppress(rep, params)
        assert len(out) == 2
        assert np.array_equal(out.antibodies[0].vector, a)
        assert np.array_equal(out.antibodies[1].vector, c)

    def test_idempotent_on_random_repertoires(self):
        rng = np.random.default_rng(7)
        for metric in ("euclidean", "cosine"):
            params = self._params(metric=metric, suppression_threshold=0.3)
            for _ in range(20):
                rep = Repertoire(antibodies=[
                    Antibody(vector=rng.normal(size=4),
                             stimulation=int(rng.integers(0, 5)),
                             age=int(rng.integers(0, 5)))
                    for _ in range(rng.integers(1, 25))])
                once = suppress(rep, params)
                twice = suppress(once, params)
                assert len(once) == len(twice)
                assert all(np.array_equal(x.vector, y.vector)
                           for x, y in zip(once.antibodies, twice.antibodies))

    def test_survivors_pairwise_separated(self):
        rng = np.random.default_rng(9)
        for metric in ("euclidean", "minkowski4", "cosine"):
            params = self._params(metric=metric, suppression_threshold=0.25)
            rep = Repertoire(antibodies=[Antibody(vector=rng.normal(size=3))
                                         for _ in range(40)])
            out = suppress(rep, params)
            survivors = [ab.vector for ab in out.antibodies]
            for i in range(len(survivors)):
                for j in range(i + 1, len(survivors)):
                    assert closeness(metric, survivors[i], survivors[j]) > 0.25


class TestRunAis:
    def test_degenerate_corpus_collapses(self):
        point = np.zeros(8)
        point[0] = 1.0
        antigens = point_antigens([point.copy() for _ in range(30)])
        for seed in range(5):
            params = AISParams(seed=seed)
            repertoire, history = run_ais(antigens, params)
            clustering = extract_clusters(repertoire, antigens, params)
            assert clustering.num_clusters == 1
        # With seed 0 the repertoire itself collapses onto the point.
        params = AISParams(seed=0)
        repertoire, _ = run_ais(antigens, params)
        resolved = params.resolved(len(antigens))
        within = [ab for ab in repertoire.antibodies
                  if cosine_similarity(ab.vector, point)
                  >= resolved.affinity_threshold]
        assert len(within) == 1

    def test_blob_recovery(self):
        wins = 0
        for seed in range(10):
            X, _ = make_blobs(seed)
            antigens = blob_antigens(X)
            params = AISParams(seed=seed)
            repertoire, _ = run_ais(antigens, params)
            clustering = extract_clusters(repertoire, antigens, params)
            wins += clustering.num_clusters == 3
        assert wins >= 9

    def test_determinism_bit_identical(self):
        X, _ = make_blobs(3)
        antigens = blob_antigens(X)
        params = AISParams(seed=11)
        rep1, hist1 = run_ais(antigens, params)
        rep2, hist2 = run_ais(antigens, params)
        assert hist1 == hist2
        assert rep1.vectors().tobytes() == rep2.vectors().tobytes()
        assert [(a.stimulation, a.age, a.lineage) for a in rep1.antibodies] == \
               [(a.stimulation, a.age, a.lineage) for a in rep2.antibodies]

    def test_zero_mutation_closure(self):
        """With no mutation noise and founders drawn from the antigens,
        every antibody ever kept is an exact copy of some antigen."""
        X, _ = make_blobs(5, per=10)
        antigens = blob_antigens(X)
        params = AISParams(seed=2, mutation_scale=0.0,
                           initial_repertoire_size=len(antigens),
                           max_iterations=5)
        repertoire, _ = run_ais(antigens, params)
        pool = X.tolist()
        for ab in repertoire.antibodies:
            assert ab.vector.tolist() in pool

    def test_repertoire_stays_bounded(self):
        X, _ = make_blobs(4)
        antigens = blob_antigens(X)
        repertoire, history = run_ais(antigens, AISParams(seed=4))
        bound = 10 * len(antigens)
        assert len(repertoire) <= bound
        assert all(entry.size <= bound for entry in history)

    def test_stall_stop(self):
        X, _ = make_blobs(6)
        antigens = blob_antigens(X)
        params = AISParams(seed=6)
        repertoire, history = run_ais(antigens, params)
        assert len(history) <= params.max_iterations
        if len(history) < params.max_iterations:
            tail = [entry.size for entry in history[-params.stall_window:]]
            assert len(set(tail)) == 1

    def test_history_matches_repertoire(self):
        X, _ = make_blobs(8)
        antigens = blob_antigens(X)
        repertoire, history = run_ais(antigens, AISParams(seed=8))
        assert repertoire.history == history
        assert history[-1].size == len(repertoire)
        assert repertoire.iteration == len(history)

    @pytest.mark.parametrize("metric,seed", [
        ("cosine", 0), ("cosine", 1), ("euclidean", 2), ("minkowski4", 3)])
    def test_incremental_suppression_equals_full_pass(self, metric, seed):
        X, _ = make_blobs(seed)
        antigens = blob_antigens(X)
        params = AISParams(metric=metric, seed=seed, max_iterations=8)
        repertoire, history = run_ais(antigens, params)
        ref_antibodies, ref_history = reference_run(antigens, params)
        assert history == ref_history
        assert len(repertoire) == len(ref_antibodies)
        for got, want in zip(repertoire.antibodies, ref_antibodies):
            assert np.array_equal(got.vector, want.vector)
            assert (got.stimulation, got.age, got.lineage) == \
                   (want.stimulation, want.age, want.lineage)

    def test_no_antigens_rejected(self):
        with pytest.raises(ValueError):
            run_ais([], AISParams())


class TestExtractClusters:
    def test_single_antibody_single_cluster(self):
        rep = Repertoire(antibodies=[Antibody(vector=np.array([1.0, 0.0]))])
        antigens = point_antigens([[1.0, 0.1], [0.9, -0.1], [-1.0, 0.0]])
        clustering = extract_clusters(rep, antigens, AISParams(metric="euclidean"))
        assert clustering.num_clusters == 1
        assert set(clustering.assignment.values()) == {0}

    def test_two_poles_partition_by_proximity(self):
        rep = Repertoire(antibodies=[Antibody(vector=np.array([1.0, 0.0])),
                                     Antibody(vector=np.array([-1.0, 0.0]))])
        antigens = point_antigens([[0.9, 0.05], [1.1, 0.0], [-0.95, 0.1],
                                   [-1.05, -0.1]])
        clustering = extract_clusters(rep, antigens,
                                      AISParams(metric="euclidean"))
        assert clustering.num_clusters == 2
        assert clustering.assignment["g0"] == clustering.assignment["g1"]
        assert clustering.assignment["g2"] == clustering.assignment["g3"]
        assert clustering.assignment["g0"] != clustering.assignment["g2"]

    def test_empty_component_not_counted(self):
        rep = Repertoire(antibodies=[Antibody(vector=np.array([1.0, 0.0])),
                                     Antibody(vector=np.array([50.0, 0.0]))])
        antigens = point_antigens([[0.9, 0.0], [1.1, 0.0]])
        clustering = extract_clusters(rep, antigens,
                                      AISParams(metric="euclidean"))
        assert clustering.num_clusters == 1
        assert list(clustering.centers) == [0]

    def test_close_antibodies_merge_through_chain(self):
        # Pairwise links a-b and b-c pull all three into one component even
        # though a and c sit farther apart than the radius.
        rep = Repertoire(antibodies=[Antibody(vector=np.array([0.0, 0.0])),
                                     Antibody(vector=np.array([0.1, 0.0])),
                                     Antibody(vector=np.array([0.2, 0.0]))])
        antigens = point_antigens([[0.0, 0.0], [0.2, 0.0]])
        clustering = extract_clusters(rep, antigens,
                                      AISParams(metric="euclidean",
                                                suppression_threshold=0.15))
        assert clustering.num_clusters == 1

    def test_tie_goes_to_lower_component(self):
        rep = Repertoire(antibodies=[Antibody(vector=np.array([1.0, 0.0])),
                                     Antibody(vector=np.array([-1.0, 0.0]))])
        antigens = point_antigens([[0.0, 0.0]])
        clustering = extract_clusters(rep, antigens,
                                      AISParams(metric="euclidean"))
        assert clustering.assignment["g0"] == 0

    def test_center_is_most_stimulated_member(self):
        rep = Repertoire(antibodies=[
            Antibody(vector=np.array([0.0, 0.0]), stimulation=1),
            Antibody(vector=np.array([0.1, 0.0]), stimulation=9)])
        antigens = point_antigens([[0.05, 0.0]])
        clustering = extract_clusters(rep, antigens,
                                      AISParams(metric="euclidean",
                                                suppression_threshold=0.15))
        np.testing.assert_allclose(clustering.centers[0], [0.1, 0.0])

    def test_empty_repertoire_rejected(self):
        rep = Repertoire(antibodies=[])
        with pytest.raises(ValueError):
            extract_clusters(rep, point_antigens([[1.0]]), AISParams())


class TestImmuneClusteringEstimator:
    def test_matches_functional_path(self):
        X, _ = make_blobs(2)
        est = ImmuneClustering(random_state=2).fit(X)
        antigens = blob_antigens(X)
        params = AISParams(seed=2).resolved(len(antigens))
        repertoire, history = run_ais(antigens, params)
        clustering = extract_clusters(repertoire, antigens, params)
        ids = sorted(set(clustering.assignment.values()))
        dense = {c: k for k, c in enumerate(ids)}
        expected = [dense[clustering.assignment[str(i)]] for i in range(len(X))]
        assert est.labels_.tolist() == expected
        assert est.n_clusters_ == clustering.num_clusters
        assert est.history_ == history

    def test_labels_shape_and_centers(self):
        X, _ = make_blobs(0)
        est = ImmuneClustering(random_state=0).fit(X)
        assert est.labels_.shape == (len(X),)
        assert est.cluster_centers_.shape == (est.n_clusters_, X.shape[1])
        assert set(est.labels_.tolist()) == set(range(est.n_clusters_))
