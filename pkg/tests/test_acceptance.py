"""Acceptance gate: ten end-to-end criteria, one test and verdict each.

Every test prints a single "ACCEPTANCE n: PASS" or "... FAIL" line so
the suite output doubles as a checklist.  Criteria cover the combined
weighting advantage, exact pruning arithmetic, the weight update
formula, the mean-difference sweep guarantee, brute-force ranking
equality, metric axioms, descriptor fixtures, index training sanity,
precision-recall properties, and whole-pipeline determinism.
"""

import contextlib
import math
import time

import numpy as np
import pytest

from cbir.cli import run_cli
from cbir.database import (
    build_database,
    extract_features,
    load_database,
    save_database,
    serialize_database,
)
from cbir.descriptors import compute_cld, compute_eoh, compute_lbp
from cbir.evaluation import EvalConfig, auc_table, batch_evaluate
from cbir.metrics import canberra, chi_square, euclidean
from cbir.prcurve import pr_auc, pr_curve
from cbir.ranking import DistanceProfile
from cbir.retrieval import run_query
from cbir.svm_index import (
    TrainConfig,
    predict_top_categories,
    reduce_search_space,
    train_index,
)
from cbir.synthetic import generate_corpus
from cbir.weighting import (
    FeedbackContext,
    method2_mean_difference,
    relevant_ratio_update,
)

from conftest import make_vector_db


@contextlib.contextmanager
def verdict(number):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number}: FAIL")
        raise
    print(f"ACCEPTANCE {number}: PASS")


def naive_distance(metric, a, b):
    """Scalar-loop reference distance, independent of the library code."""
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
        else:
            total += (x - y) ** 2
    return math.sqrt(total) if metric == "euclid" else total


def gt_context(db, query_id, metric):
    records = {r.id: r for r in db.records}
    rec = records[query_id]
    candidates = [(r.id, r.label, r.desc) for r in db.records if r.id != query_id]
    profile = DistanceProfile.build(rec.desc, candidates, metric=metric)
    return FeedbackContext(
        db=db, profile=profile, query_id=query_id, query_label=rec.label, oracle="gt"
    )


class TestAcceptance:
    def test_1_combined_weighting_beats_individual_descriptors(self, tmp_path):
        """Automatic four-descriptor weighting must outperform each
        descriptor alone on the synthetic benchmark, for every metric,
        within a two minute budget for the whole pipeline."""
        with verdict(1):
            start = time.monotonic()
            root = str(tmp_path / "corpus")
            generate_corpus(root, classes=4, per_class=20, seed=11)
            db = build_database(root, seed=42)
            extract_features(db)
            model = train_index(db, db.split, TrainConfig())
            config = EvalConfig(
                n_queries=50,
                seed=7,
                metrics=("canberra", "chisq", "euclid"),
                modes=("single", "combined"),
                method="ratio",
                oracle="gt",
                prune=True,
            )
            report = batch_evaluate(db, model, config)
            elapsed = time.monotonic() - start

            for row in auc_table(report):
                singles = [row[c] for c in ("cdh", "lbp", "cld", "eoh")]
                combined = row["combined"]
                assert combined >= max(singles) - 0.01, row
                assert combined >= np.mean(singles) + 0.05, row
            assert elapsed < 120.0, f"pipeline took {elapsed:.1f}s"

    def test_2_category_pruning_keeps_exact_pool_fraction(self, db16, model16):
        """With 16 equal classes and the 3 best categories kept, every
        candidate pool must hold exactly 3/16 of the database, minus one
        when the query's own class makes the cut."""
        with verdict(2):
            n = len(db16.records)
            sizes = {}
            for r in db16.records:
                sizes[r.label] = sizes.get(r.label, 0) + 1
            assert n == 96 and set(sizes.values()) == {6}
            for rec in db16.records:
                top = predict_top_categories(model16, rec.desc)
                labels = [lab for lab, _ in top]
                assert len(labels) == 3
                pool = reduce_search_space(db16, labels, exclude_id=rec.id)
                base = sum(sizes[lab] for lab in labels)
                assert base == 3 * n // 16 == 18
                expected = base - (1 if rec.label in labels else 0)
                assert len(pool) == expected

    def test_3_weight_update_formula_unit_fidelity(self):
        """The multiplicative update w * IF * (K_F / K_C) must reproduce
        hand-computed values to 1e-12, including the K_C = 0 -> 1
        substitution."""
        cases = [
            ((0.25, 1.1, 8, 10), 0.22),
            ((0.30, 1.1, 5, 10), 0.165),
            ((0.10, 1.2, 3, 3), 0.12),
            ((0.50, 1.1, 0, 7), 0.0),
            ((0.25, 1.1, 4, 0), 1.1),
            ((1.00, 1.5, 2, 4), 0.75),
            ((0.20, 2.0, 10, 5), 0.8),
            ((0.00, 1.1, 6, 3), 0.0),
            ((0.40, 1.05, 7, 7), 0.42),
            ((0.33, 1.1, 1, 10), 0.0363),
            ((0.60, 1.25, 9, 0), 6.75),
            ((0.25, 1.1, 10, 10), 0.275),
        ]
        with verdict(3):
            assert len(cases) >= 10
            for (w, factor, k_f, k_c), expected in cases:
                got = relevant_ratio_update(w, factor, k_f, k_c)
                assert got == pytest.approx(expected, rel=1e-12, abs=1e-15)
            assert relevant_ratio_update(0.7, 1.4, 3, 0) == relevant_ratio_update(
                0.7, 1.4, 3, 1
            )

    def test_4_mean_difference_sweep_never_loses_to_endpoints(self, db4):
        """Over 20 random queries the mean-difference sweep must return
        weights at least as good as both sweep endpoints (the initial
        mix and the single best descriptor), with zero violations."""
        with verdict(4):
            rng = np.random.default_rng(904)
            test_ids = sorted(db4.split.test_ids)
            queries = rng.choice(test_ids, size=20, replace=False)
            metrics = ("canberra", "chisq", "euclid")
            violations = 0
            for i, qid in enumerate(int(q) for q in queries):
                ctx = gt_context(db4, qid, metrics[i % 3])
                weights, trace = method2_mean_difference(ctx)
                returned = pr_auc(ctx.profile.rank(weights.as_array()), ctx.relevant)
                if returned < trace[0].auc - 1e-12:
                    violations += 1
                if returned < trace[-1].auc - 1e-12:
                    violations += 1
            assert violations == 0

    def test_5_ranking_matches_brute_force_search(self, db4):
        """With pruning disabled, the top 10 of every query must equal an
        exhaustive naive-loop search, for 50 random combinations of
        query, metric and weights."""
        with verdict(5):
            rng = np.random.default_rng(905)
            by_id = {r.id: r for r in db4.records}
            metrics = ("canberra", "chisq", "euclid")
            for _ in range(50):
                qid = int(rng.integers(len(db4.records)))
                metric = metrics[int(rng.integers(3))]
                weights = rng.random(4) + 0.05

                ranked = run_query(
                    db4, qid, metric=metric, weights=weights, prune=False, top_n=10
                )

                q = by_id[qid].desc.vectors()
                pool = [r for r in db4.records if r.id != qid]
                w = weights / weights.sum()
                raw = np.array(
                    [
                        [naive_distance(metric, q[f], r.desc.vectors()[f]) for f in range(4)]
                        for r in pool
                    ]
                )
                scored = []
                for j, r in enumerate(pool):
                    total = 0.0
                    for f in range(4):
                        lo, hi = raw[:, f].min(), raw[:, f].max()
                        nd = 0.0 if hi == lo else (raw[j, f] - lo) / (hi - lo)
                        total += w[f] * nd
                    scored.append((total, r.id))
                scored.sort()
                assert ranked.ids == [i for _, i in scored[:10]]

    def test_6_distance_metric_axioms(self):
        """Non-negativity, symmetry and self-distance zero must hold for
        all three metrics over 1000 random pairs, and the Euclidean
        distance must satisfy the triangle inequality."""
        with verdict(6):
            rng = np.random.default_rng(906)
            for _ in range(1000):
                dim = int(rng.integers(2, 64))
                a = rng.random(dim) * rng.integers(0, 2, dim)
                b = rng.random(dim) * rng.integers(0, 2, dim)
                c = rng.random(dim)
                for fn in (canberra, chi_square, euclidean):
                    dab = fn(a, b)
                    assert dab >= 0.0
                    assert abs(dab - fn(b, a)) <= 1e-9
                    assert fn(a, a) <= 1e-9
                assert euclidean(a, c) <= euclidean(a, b) + euclidean(b, c) + 1e-9

    def test_7_descriptor_fixture_responses(self):
        """A constant image must produce the all-ones texture code, a
        vanishing layout AC spectrum and a degenerate uniform edge
        histogram; a vertical step edge must put at least 90% of edge
        mass in the vertical bin."""
        with verdict(7):
            flat = np.full((32, 32, 3), 77, dtype=np.uint8)
            lbp = compute_lbp(flat)
            assert lbp[255] == 1.0 and np.count_nonzero(lbp) == 1

            cld = compute_cld(np.full((64, 64, 3), 128, dtype=np.uint8))
            ac = np.delete(cld, [0, 6, 9])
            assert np.all(np.abs(ac) < 1e-9)

            np.testing.assert_allclose(compute_eoh(flat), np.full(5, 0.2))

            step = np.full((32, 32), 40, dtype=np.uint8)
            step[:, 16:] = 200
            eoh = compute_eoh(np.stack([step] * 3, axis=-1))
            assert eoh[0] >= 0.9

    def test_8_category_index_sanity_and_determinism(self):
        """Cleanly separable data must classify perfectly, shuffled labels
        must score within 10 points of chance, and retraining on the same
        inputs must give bitwise-identical models."""
        with verdict(8):
            separable = make_vector_db(n_classes=4, per_class=25, seed=801, spread=0.005)
            model = train_index(separable, separable.split)
            assert model.test_accuracy == 1.0

            shuffled = make_vector_db(n_classes=4, per_class=50, seed=800, spread=0.02)
            rng = np.random.default_rng(900)
            labels = [r.label for r in shuffled.records]
            rng.shuffle(labels)
            for record, label in zip(shuffled.records, labels):
                record.label = label
            chance_model = train_index(shuffled, shuffled.split)
            assert abs(chance_model.test_accuracy - 0.25) <= 0.10

            again = train_index(separable, separable.split)
            for a, b in zip(model.models, again.models):
                np.testing.assert_array_equal(a.weights, b.weights)
                assert a.bias == b.bias
            np.testing.assert_array_equal(model.scaler_min, again.scaler_min)
            np.testing.assert_array_equal(model.scaler_max, again.scaler_max)

    def test_9_precision_recall_properties(self):
        """A perfect ranking must score exactly 1.0, random rankings must
        average near the relevance fraction, and interpolated precision
        must never increase along the recall grid."""
        with verdict(9):
            relevant = frozenset(range(10))
            perfect = list(range(10)) + list(range(10, 20))
            curve = pr_curve(perfect, relevant)
            assert curve.auc == 1.0
            assert np.all(curve.precision == 1.0)

            rng = np.random.default_rng(909)
            pool = 400
            for frac in (0.25, 0.5):
                n_rel = int(pool * frac)
                rel = frozenset(range(n_rel))
                aucs = []
                for _ in range(200):
                    order = rng.permutation(pool).tolist()
                    aucs.append(pr_auc(order, rel))
                assert abs(np.mean(aucs) - frac) <= 0.05, (frac, np.mean(aucs))

            for _ in range(50):
                pool_ids = rng.permutation(60).tolist()
                rel = frozenset(int(i) for i in rng.choice(60, size=12, replace=False))
                curve = pr_curve(pool_ids, rel)
                assert np.all(np.diff(curve.precision) <= 1e-15)

    def test_10_end_to_end_determinism(self, tmp_path, db4):
        """Two full pipeline runs from the same seeds must produce
        byte-identical evaluation tables, and a database must survive a
        save/load cycle bitwise."""
        with verdict(10):
            reports = []
            for run in ("one", "two"):
                base = tmp_path / run
                corpus = str(base / "corpus")
                dbfile = str(base / "features.db")
                out = str(base / "report")
                assert run_cli([
                    "ingest", "--root", corpus, "--db", dbfile, "--seed", "4",
                    "--synthetic", "classes=3", "per-class=6", "seed=4",
                ]) == 0
                assert run_cli(["extract", "--db", dbfile]) == 0
                assert run_cli(["train", "--db", dbfile]) == 0
                assert run_cli([
                    "evaluate", "--db", dbfile, "--n", "5", "--seed", "7", "--out", out,
                ]) == 0
                with open(base / "report" / "auc.csv", "rb") as fh:
                    reports.append(fh.read())
            assert reports[0] == reports[1]

            path = tmp_path / "roundtrip.db"
            save_database(db4, path)
            loaded = load_database(path)
            assert serialize_database(loaded) == serialize_database(db4)

            vec_db = make_vector_db(n_classes=3, per_class=6, seed=910)
            vec_db.model = train_index(vec_db, vec_db.split)
            path2 = tmp_path / "model.db"
            save_database(vec_db, path2)
            assert serialize_database(load_database(path2)) == serialize_database(vec_db)
