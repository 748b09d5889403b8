"""Learning per-query descriptor weights from relevance feedback.

No single descriptor wins on every query, so the engine learns a
per-query blend.  Method 1 multiplies each weight by an increment
factor scaled by the ratio of solo to combined relevant counts in the
top of the ranking.  Method 2 sweeps mass toward the initially best
descriptor and keeps the mix with the best precision-recall area.
This script runs both on one query and prints their iteration traces.
"""

import tempfile

import numpy as np

from cbir.database import build_database, extract_features
from cbir.prcurve import pr_auc
from cbir.ranking import DistanceProfile
from cbir.synthetic import generate_corpus
from cbir.weighting import (
    FeedbackContext,
    WeightVector,
    initial_weights,
    method1_relevant_ratio,
    method2_mean_difference,
)


def main():
    root = tempfile.mkdtemp(prefix="cbir_demo_corpus_")
    print("generating a 4-class corpus (8 images per class) ...")
    generate_corpus(root, classes=4, per_class=8, seed=19)
    db = build_database(root, seed=42)
    extract_features(db)

    def context_for(query_id):
        rec = next(r for r in db.records if r.id == query_id)
        pool = [(r.id, r.label, r.desc) for r in db.records if r.id != query_id]
        profile = DistanceProfile.build(rec.desc, pool, metric="chisq")
        return rec, FeedbackContext(
            db=db, profile=profile, query_id=query_id, query_label=rec.label,
            oracle="gt",
        )

    # Many queries are easy enough that uniform weights already rank
    # perfectly; pick the held-out query where weighting has work to do.
    uniform = WeightVector.uniform().as_array()
    def uniform_auc(query_id):
        _, ctx = context_for(query_id)
        return pr_auc(ctx.profile.rank(uniform), ctx.relevant)

    query_id = min(sorted(db.split.test_ids), key=uniform_auc)
    rec, ctx = context_for(query_id)
    profile = ctx.profile

    print(f"query {query_id} (class {rec.label}), "
          f"{len(profile.ids)} candidates, chisq metric")
    print(f"uniform-weight PR area: {pr_auc(profile.rank(uniform), ctx.relevant):.4f}")
    start = initial_weights(ctx).as_array()
    print(f"initial weights from solo PR areas: {np.round(start, 4).tolist()}")

    print()
    print("Method 1: relevant-ratio updates")
    w1, trace1 = method1_relevant_ratio(ctx)
    print(f"{'iter':>4s} {'cdh':>7s} {'lbp':>7s} {'cld':>7s} {'eoh':>7s} {'k_c':>4s}")
    for step in trace1:
        cells = " ".join(f"{w:7.4f}" for w in step.weights)
        flag = " (k_c=0 treated as 1)" if step.kc_substituted else ""
        print(f"{step.iteration:4d} {cells} {step.k_c:4d}{flag}")
    auc1 = pr_auc(profile.rank(w1.as_array()), ctx.relevant)
    print(f"returned weights {np.round(w1.as_array(), 4).tolist()} "
          f"with PR area {auc1:.4f}")

    print()
    print("Method 2: mean-difference sweep")
    w2, trace2 = method2_mean_difference(ctx)
    print(f"{'iter':>4s} {'cdh':>7s} {'lbp':>7s} {'cld':>7s} {'eoh':>7s} {'auc':>7s}")
    for step in trace2:
        cells = " ".join(f"{w:7.4f}" for w in step.weights)
        print(f"{step.iteration:4d} {cells} {step.auc:7.4f}")
    auc2 = pr_auc(profile.rank(w2.as_array()), ctx.relevant)
    print(f"returned weights {np.round(w2.as_array(), 4).tolist()} "
          f"with PR area {auc2:.4f}")


if __name__ == "__main__":
    main()
