"""Query execution tests: pooling, weighting, ranking, output writers.

The central check is a brute-force oracle: with pruning disabled the
ranked list must exactly reproduce a naive loop that computes raw
distances, min-max normalizes per descriptor, takes the weighted sum
and sorts by (distance, id).
"""

import io
import math

import numpy as np
import pytest

from cbir.errors import EmptyCandidatePool
from cbir.ranking import DistanceProfile, combined_distance, pool_norms
from cbir.retrieval import RankedEntry, RankedList, run_query, write_ranked_csv, contact_sheet_svg
from cbir.svm_index import train_index
from cbir.weighting import WeightVector

from conftest import make_vector_db, random_descriptor_set


def naive_distance(metric, a, b):
    mean_a = sum(a) / len(a)
    mean_b = sum(b) / len(b)
    total = 0.0
    for x, y in zip(a, b):
        if metric == "canberra":
            denom = abs(x + mean_a) + abs(y + mean_b)
            if denom != 0.0:
                total += abs(x - y) / denom
        elif metric == "chisq":
            denom = (x + y) / 2.0
            if denom != 0.0:
                total += (x - y) ** 2 / denom
        elif metric == "euclid":
            total += (x - y) ** 2
        else:
            raise ValueError(metric)
    return math.sqrt(total) if metric == "euclid" else total


def naive_full_ranking(db, query_id, metric, weights):
    """Loop-and-sort reference for an unpruned query."""
    query = next(r for r in db.records if r.id == query_id)
    pool = [r for r in db.records if r.id != query_id]
    q = query.desc.vectors()
    raw = []
    for r in pool:
        vecs = r.desc.vectors()
        raw.append([naive_distance(metric, q[f], vecs[f]) for f in range(4)])
    raw = np.array(raw)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    scored = []
    for j, r in enumerate(pool):
        total = 0.0
        for f in range(4):
            lo, hi = raw[:, f].min(), raw[:, f].max()
            nd = 0.0 if hi == lo else (raw[j, f] - lo) / (hi - lo)
            total += w[f] * nd
        scored.append((total, r.id))
    scored.sort()
    return [i for _, i in scored]


class TestCombinedArithmetic:
    def test_three_candidate_weighted_sum_by_hand(self):
        rng = np.random.default_rng(300)
        query = random_descriptor_set(rng)
        cands = [(i, "x", random_descriptor_set(rng)) for i in range(3)]
        profile = DistanceProfile.build(query, cands, metric="canberra")

        w = np.array([0.4, 0.3, 0.2, 0.1])
        got = profile.combined(w)
        for j in range(3):
            expected = 0.0
            for f in range(4):
                row = profile.raw[f]
                lo, hi = row.min(), row.max()
                nd = 0.0 if hi == lo else (row[j] - lo) / (hi - lo)
                expected += w[f] * nd
            assert got[j] == pytest.approx(expected, rel=1e-12)

    def test_single_pair_helper_matches_profile(self):
        rng = np.random.default_rng(301)
        query = random_descriptor_set(rng)
        cands = [(i, "x", random_descriptor_set(rng)) for i in range(6)]
        for metric in ("canberra", "chisq", "euclid"):
            profile = DistanceProfile.build(query, cands, metric=metric)
            norms = pool_norms(profile.raw)
            w = np.array([0.25, 0.25, 0.25, 0.25])
            expected = profile.combined(w)
            for j, (_, _, ds) in enumerate(cands):
                got = combined_distance(query, ds, w, metric, norms)
                assert got == pytest.approx(expected[j], rel=1e-9, abs=1e-12)

    def test_one_hot_weights_reduce_to_solo_ranking(self):
        rng = np.random.default_rng(302)
        query = random_descriptor_set(rng)
        cands = [(i, "x", random_descriptor_set(rng)) for i in range(10)]
        profile = DistanceProfile.build(query, cands)
        for f in range(4):
            one_hot = np.zeros(4)
            one_hot[f] = 1.0
            np.testing.assert_array_equal(profile.rank(one_hot), profile.solo_rank(f))

    def test_normalized_distances_unit_interval(self):
        rng = np.random.default_rng(303)
        query = random_descriptor_set(rng)
        cands = [(i, "x", random_descriptor_set(rng)) for i in range(8)]
        profile = DistanceProfile.build(query, cands)
        assert profile.normalized.min() >= 0.0
        assert profile.normalized.max() <= 1.0

    def test_empty_pool_rejected(self):
        rng = np.random.default_rng(304)
        with pytest.raises(EmptyCandidatePool):
            DistanceProfile.build(random_descriptor_set(rng), [])


class TestBruteForceOracle:
    def test_unpruned_ranking_matches_naive_loop(self):
        rng = np.random.default_rng(310)
        db = make_vector_db(n_classes=3, per_class=7, seed=310, spread=0.3)
        for metric in ("canberra", "chisq", "euclid"):
            for _ in range(3):
                qid = int(rng.integers(len(db.records)))
                weights = rng.random(4) + 0.05
                ranked = run_query(
                    db, qid, metric=metric, weights=weights, prune=False, top_n=None
                )
                assert ranked.ids == naive_full_ranking(db, qid, metric, weights)

    def test_top_n_is_prefix_of_full_ranking(self):
        db = make_vector_db(n_classes=3, per_class=6, seed=311)
        full = run_query(db, 0, prune=False, top_n=None)
        head = run_query(db, 0, prune=False, top_n=5)
        assert head.ids == full.ids[:5]


class TestRunQuery:
    def test_query_excluded_and_pool_size(self):
        db = make_vector_db(n_classes=3, per_class=6, seed=320)
        ranked = run_query(db, 4, prune=False, top_n=None)
        assert 4 not in ranked.ids
        assert ranked.pool_size == len(db.records) - 1
        assert len(ranked.ids) == ranked.pool_size

    def test_weight_scaling_invariance(self):
        db = make_vector_db(n_classes=3, per_class=6, seed=321)
        a = run_query(db, 0, weights=(0.1, 0.2, 0.3, 0.4), prune=False, top_n=None)
        b = run_query(db, 0, weights=(1.0, 2.0, 3.0, 4.0), prune=False, top_n=None)
        assert a.ids == b.ids
        np.testing.assert_allclose(a.weights.as_array(), b.weights.as_array(), rtol=1e-12)
        assert a.weights.as_array().sum() == pytest.approx(1.0)

    def test_default_weights_uniform(self):
        db = make_vector_db(n_classes=2, per_class=5, seed=322)
        ranked = run_query(db, 0, prune=False)
        np.testing.assert_allclose(ranked.weights.as_array(), 0.25)

    def test_distance_ties_broken_by_id(self):
        db = make_vector_db(n_classes=2, per_class=5, seed=323)
        # give two candidates identical descriptors, hence identical distances
        db.records[3].desc = db.records[7].desc
        ranked = run_query(db, 0, prune=False, top_n=None)
        pos3, pos7 = ranked.ids.index(3), ranked.ids.index(7)
        assert abs(pos3 - pos7) == 1
        assert pos3 < pos7

    def test_per_descriptor_distances_in_unit_interval(self):
        db = make_vector_db(n_classes=3, per_class=6, seed=324)
        ranked = run_query(db, 2, prune=False, top_n=None)
        for e in ranked.entries:
            assert len(e.per_descriptor) == 4
            for v in e.per_descriptor:
                assert 0.0 <= v <= 1.0

    def test_weights_and_auto_method_mutually_exclusive(self):
        db = make_vector_db(n_classes=2, per_class=5, seed=325)
        with pytest.raises(ValueError):
            run_query(db, 0, weights=(1, 1, 1, 1), auto_method="ratio", prune=False)

    def test_unknown_auto_method_rejected(self):
        db = make_vector_db(n_classes=2, per_class=5, seed=326)
        with pytest.raises(ValueError):
            run_query(db, 0, auto_method="gradient", prune=False)

    def test_pruning_requires_model(self):
        db = make_vector_db(n_classes=2, per_class=5, seed=327)
        with pytest.raises(ValueError):
            run_query(db, 0, prune=True, model=None)

    def test_missing_record_id(self):
        db = make_vector_db(n_classes=2, per_class=5, seed=328)
        with pytest.raises(KeyError):
            run_query(db, 999, prune=False)

    def test_auto_ratio_with_ground_truth(self):
        db = make_vector_db(n_classes=3, per_class=8, seed=329, spread=0.05)
        ranked = run_query(db, 0, auto_method="ratio", oracle="gt", prune=False)
        assert ranked.weights.as_array().sum() == pytest.approx(1.0, abs=1e-9)
        assert ranked.labels[:5].count("cls0") >= 4

    def test_auto_meandiff_with_pseudo_oracle(self):
        db = make_vector_db(n_classes=3, per_class=8, seed=330, spread=0.05)
        ranked = run_query(db, 1, auto_method="meandiff", oracle="pseudo", prune=False)
        assert ranked.weights.as_array().sum() == pytest.approx(1.0, abs=1e-9)

    def test_array_query_ranks_whole_database(self):
        db = make_vector_db(n_classes=2, per_class=5, seed=331)
        rng = np.random.default_rng(331)
        img = rng.integers(0, 256, (32, 32, 3), dtype=np.uint8)
        ranked = run_query(db, img, prune=False, top_n=None)
        assert ranked.query_id is None
        assert ranked.pool_size == len(db.records)

    def test_ground_truth_oracle_needs_database_query(self):
        db = make_vector_db(n_classes=2, per_class=5, seed=332)
        rng = np.random.default_rng(332)
        img = rng.integers(0, 256, (32, 32, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            run_query(db, img, auto_method="ratio", oracle="gt", prune=False)

    def test_pruned_pool_restricted_to_top_categories(self):
        db = make_vector_db(n_classes=5, per_class=8, seed=333, spread=0.01)
        model = train_index(db, db.split)
        ranked = run_query(db, 0, model=model, top_n=None)
        assert len(ranked.pruned_to) == 3
        assert "cls0" in ranked.pruned_to
        allowed = {r.id for r in db.records if r.label in set(ranked.pruned_to)} - {0}
        assert set(ranked.ids) == allowed
        assert ranked.pool_size == len(allowed)

    def test_pruned_and_unpruned_agree_on_easy_top_results(self):
        db = make_vector_db(n_classes=4, per_class=12, seed=334, spread=0.005)
        model = train_index(db, db.split)
        pruned = run_query(db, 0, model=model, top_n=10)
        full = run_query(db, 0, prune=False, top_n=10)
        assert pruned.labels == ["cls0"] * 10
        assert full.labels == ["cls0"] * 10


class TestWriters:
    def _tiny_ranked(self):
        entries = [
            RankedEntry(id=3, label="a", path="a/3.png", distance=0.125,
                        per_descriptor=(0.1, 0.2, 0.0, 1.0)),
            RankedEntry(id=1, label="b", path="b/1.png", distance=0.5,
                        per_descriptor=(0.9, 0.8, 0.7, 0.6)),
        ]
        return RankedList(
            entries=entries,
            weights=WeightVector.uniform(),
            metric="canberra",
            pool_size=2,
            pruned_to=[],
            query_id=0,
        )

    def test_csv_layout(self):
        out = io.StringIO()
        write_ranked_csv(self._tiny_ranked(), out)
        lines = out.getvalue().splitlines()
        assert lines[0] == "rank,id,label,path,distance,nd_cdh,nd_lbp,nd_cld,nd_eoh"
        assert lines[1] == "1,3,a,a/3.png,0.125000,0.100000,0.200000,0.000000,1.000000"
        assert lines[2] == "2,1,b,b/1.png,0.500000,0.900000,0.800000,0.700000,0.600000"

    def test_contact_sheet_marks_relevance(self, db4, model4, corpus4_dir):
        query_id = sorted(db4.split.test_ids)[0]
        ranked = run_query(db4, query_id, model=model4, top_n=5)
        out = io.StringIO()
        contact_sheet_svg(db4, ranked, out, root=corpus4_dir)
        svg = out.getvalue()
        assert svg.startswith("<svg")
        assert svg.count("<image") == 5
        assert "data:image/png;base64," in svg
        assert ("#2e8b57" in svg) or ("#b22222" in svg)
