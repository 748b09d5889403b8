"""Command-line interface.

Subcommands mirror the pipeline: ingest, extract, train, query,
weights, evaluate, export.  Exit code 0 on success, 1 on user errors
(bad arguments, missing files, domain failures), 2 on internal errors.
All diagnostics go to stderr; data output goes to stdout or to files.
"""

import argparse
import csv
import json
import sys
import traceback

from .database import (
    build_database,
    export_json,
    extract_features,
    load_database,
    save_database,
)
from .descriptors import DESCRIPTOR_NAMES, compute_all
from .errors import CbirError, EmptyCandidatePool
from .evaluation import EvalConfig, auc_table, batch_evaluate, emit_report
from .ingest import load_and_resize
from .metrics import METRIC_IDS
from .ranking import DistanceProfile
from .retrieval import contact_sheet_svg, run_query, write_ranked_csv
from .svm_index import TrainConfig, predict_top_categories, reduce_search_space, train_index
from .synthetic import generate_corpus
from .weighting import (
    FeedbackContext,
    method1_relevant_ratio,
    method2_mean_difference,
)

_METHOD_NAMES = ("ratio", "meandiff")


def _parse_synthetic(pairs):
    opts = {"classes": 4, "per-class": 20, "seed": 7}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or key not in opts:
            raise ValueError(
                f"bad synthetic option {pair!r}; expected classes=, per-class=, seed="
            )
        opts[key] = int(value)
    return opts


def cmd_ingest(args):
    if args.synthetic is not None:
        opts = _parse_synthetic(args.synthetic)
        generate_corpus(
            args.root,
            classes=opts["classes"],
            per_class=opts["per-class"],
            seed=opts["seed"],
        )
        print(
            f"generated synthetic corpus: {opts['classes']} classes x "
            f"{opts['per-class']} images under {args.root}",
            file=sys.stderr,
        )
    db = build_database(args.root, seed=args.seed)
    save_database(db, args.db)
    print(
        f"ingested {len(db.records)} images in {len(db.header['classes'])} classes "
        f"-> {args.db}",
        file=sys.stderr,
    )
    return 0


def cmd_extract(args):
    db = load_database(args.db)
    extract_features(db, root=args.root)
    save_database(db, args.db)
    print(f"extracted descriptors for {len(db.records)} images", file=sys.stderr)
    return 0


def cmd_train(args):
    db = load_database(args.db)
    if any(r.desc is None for r in db.records):
        raise CbirError("database has unextracted records; run extract first")
    if db.split is None:
        raise CbirError("database has no train/test split; re-run ingest")
    config = TrainConfig(c=args.c, epochs=args.epochs, seed=args.seed, top_k=args.topk)
    db.model = train_index(db, db.split, config)
    save_database(db, args.db)
    print(
        f"trained {len(db.model.models)} category models, "
        f"test accuracy {db.model.test_accuracy:.3f}",
        file=sys.stderr,
    )
    return 0


def _query_ref(text):
    try:
        return int(text)
    except ValueError:
        return text


def _parse_weights(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError("expected four comma-separated weights")
    return [float(p) for p in parts]


def cmd_query(args):
    db = load_database(args.db)
    weights = _parse_weights(args.weights) if args.weights else None
    ranked = run_query(
        db,
        _query_ref(args.image),
        model=db.model,
        metric=args.metric,
        weights=weights,
        auto_method=args.auto,
        oracle=args.oracle,
        top_n=args.topn,
        prune=not args.no_prune,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_ranked_csv(ranked, fh)
    else:
        write_ranked_csv(ranked, sys.stdout)
    if args.sheet:
        with open(args.sheet, "w", encoding="utf-8") as fh:
            contact_sheet_svg(db, ranked, fh)
    w = ranked.weights.as_array()
    pretty = " ".join(f"{n}={v:.4f}" for n, v in zip(DESCRIPTOR_NAMES, w))
    print(
        f"metric={ranked.metric} pool={ranked.pool_size} weights: {pretty}",
        file=sys.stderr,
    )
    return 0


def _feedback_context(db, args):
    """Pool, profile, and oracle context for one weights-command query."""
    ref = _query_ref(args.image)
    if isinstance(ref, int):
        rec = next((r for r in db.records if r.id == ref), None)
        if rec is None:
            raise CbirError(f"no record with id {ref}")
        query_set, query_label, query_id = rec.desc, rec.label, rec.id
    else:
        query_set = compute_all(load_and_resize(ref))
        query_label, query_id = None, None
    if args.no_prune or db.model is None:
        pool = [r.id for r in db.records if r.id != query_id]
    else:
        top = predict_top_categories(db.model, query_set)
        pool = reduce_search_space(db, [lab for lab, _ in top], exclude_id=query_id)
    if not pool:
        raise EmptyCandidatePool("candidate pool is empty")
    by_id = {r.id: r for r in db.records}
    candidates = [(i, by_id[i].label, by_id[i].desc) for i in pool]
    profile = DistanceProfile.build(query_set, candidates, args.metric)
    return FeedbackContext(
        db=db,
        profile=profile,
        query_id=query_id,
        query_label=query_label,
        oracle=args.oracle,
        feedback_k=args.k,
        increment_factor=args.increment_factor,
    )


def _write_trace(trace, method, stream):
    writer = csv.writer(stream, lineterminator="\n")
    wcols = [f"w_{n}" for n in DESCRIPTOR_NAMES]
    if method == "ratio":
        writer.writerow(["iteration", *wcols, "k_c", "kc_substituted"])
        for step in trace:
            writer.writerow(
                [step.iteration]
                + [f"{v:.6f}" for v in step.weights]
                + [step.k_c, str(step.kc_substituted).lower()]
            )
    else:
        writer.writerow(["iteration", *wcols, "auc"])
        for step in trace:
            writer.writerow(
                [step.iteration]
                + [f"{v:.6f}" for v in step.weights]
                + [f"{step.auc:.6f}"]
            )


def cmd_weights(args):
    db = load_database(args.db)
    ctx = _feedback_context(db, args)
    if args.method == "ratio":
        wvec, trace = method1_relevant_ratio(ctx)
        score = f"k_c={max(s.k_c for s in trace)}"
    else:
        wvec, trace = method2_mean_difference(ctx)
        score = f"auc={max(s.auc for s in trace):.4f}"
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            _write_trace(trace, args.method, fh)
    arr = wvec.as_array()
    for name, v in zip(DESCRIPTOR_NAMES, arr):
        print(f"{name} {v:.4f} ({100.0 * v:.2f}%)")
    print(f"method={args.method} iterations={trace[-1].iteration} {score}", file=sys.stderr)
    return 0


def cmd_evaluate(args):
    db = load_database(args.db)
    if db.model is None and not args.no_prune:
        raise CbirError("database has no trained index; run train or use --no-prune")
    metrics = METRIC_IDS if args.metrics == "all" else tuple(args.metrics.split(","))
    modes = tuple(args.modes.split(","))
    config = EvalConfig(
        n_queries=args.n,
        seed=args.seed,
        metrics=metrics,
        modes=modes,
        method=args.method,
        oracle=args.oracle,
        prune=not args.no_prune,
    )
    report = batch_evaluate(db, db.model, config)
    paths = emit_report(report, args.out)
    cols = ["metric", *DESCRIPTOR_NAMES, "combined"]
    print(" ".join(f"{c:>10}" for c in cols))
    for row in auc_table(report):
        cells = [row["metric"]] + [
            "-" if row[c] is None else f"{row[c]:.4f}" for c in cols[1:]
        ]
        print(" ".join(f"{c:>10}" for c in cells))
    print(
        "wrote " + ", ".join(sorted(paths.values())),
        file=sys.stderr,
    )
    return 0


def cmd_export(args):
    db = load_database(args.db)
    payload = json.dumps(export_json(db), sort_keys=True, indent=2)
    if args.json == "-":
        print(payload)
    else:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
        print(f"exported {args.db} -> {args.json}", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cbir",
        description="Content-based image retrieval with weighted descriptor fusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="scan a corpus directory into a database file")
    p.add_argument("--root", required=True, help="corpus directory (one subdir per class)")
    p.add_argument("--db", required=True, help="output database file")
    p.add_argument("--seed", type=int, default=42, help="train/test split seed")
    p.add_argument(
        "--synthetic",
        nargs="*",
        metavar="KEY=VALUE",
        help="generate a synthetic corpus first (classes=, per-class=, seed=)",
    )
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="compute descriptors for every record")
    p.add_argument("--db", required=True)
    p.add_argument("--root", default=None, help="override the stored corpus root")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="fit per-class SVMs for index pruning")
    p.add_argument("--db", required=True)
    p.add_argument("--c", type=float, default=1.0, help="soft-margin parameter")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--topk", type=int, default=3, help="categories kept at query time")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("query", help="rank database images against a query")
    p.add_argument("--db", required=True)
    p.add_argument("--image", required=True, help="record id or image path")
    p.add_argument("--metric", choices=METRIC_IDS, default="canberra")
    p.add_argument("--weights", default=None, help="four comma-separated weights")
    p.add_argument("--auto", choices=_METHOD_NAMES, default=None,
                   help="learn weights automatically")
    p.add_argument("--oracle", choices=("gt", "pseudo"), default="pseudo",
                   help="relevance signal for --auto")
    p.add_argument("--topn", type=int, default=10)
    p.add_argument("--no-prune", action="store_true", help="skip SVM category pruning")
    p.add_argument("--out", default=None, help="write ranking CSV here instead of stdout")
    p.add_argument("--sheet", default=None, help="write an SVG contact sheet here")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("weights", help="learn per-query descriptor weights")
    p.add_argument("--db", required=True)
    p.add_argument("--image", required=True, help="record id or image path")
    p.add_argument("--method", choices=_METHOD_NAMES, required=True)
    p.add_argument("--metric", choices=METRIC_IDS, default="canberra")
    p.add_argument("--if", dest="increment_factor", type=float, default=1.1,
                   help="increment factor for the ratio method")
    p.add_argument("--k", type=int, default=10, help="feedback window size")
    p.add_argument("--oracle", choices=("gt", "pseudo"), default="gt")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--trace", default=None, help="write the iteration trace CSV here")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("evaluate", help="batch PR evaluation over test queries")
    p.add_argument("--db", required=True)
    p.add_argument("--n", type=int, default=50, help="number of test queries")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--metrics", default="all", help='"all" or comma list of metric ids')
    p.add_argument("--modes", default="single,combined")
    p.add_argument("--method", choices=_METHOD_NAMES, default="ratio")
    p.add_argument("--oracle", choices=("gt", "pseudo"), default="gt")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--out", default="report", help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("export", help="dump a database as JSON")
    p.add_argument("--db", required=True)
    p.add_argument("--json", required=True, help='output path, or "-" for stdout')
    p.set_defaults(func=cmd_export)

    return parser


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args) or 0
    except (CbirError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
