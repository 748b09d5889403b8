"""Batch retrieval evaluation: averaged PR curves and AUC tables.

For a seeded random sample of test-split queries, each requested metric
is evaluated in single-descriptor mode (each descriptor ranking alone)
and combined mode (automatically weighted ranking over the pruned
pool).  Precision curves average pointwise over queries; AUC of the
averaged curve equals the average of per-query AUCs.
"""

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .descriptors import DESCRIPTOR_NAMES
from .metrics import METRIC_IDS
from .prcurve import RECALL_GRID, average_curves, pr_curve
from .ranking import DistanceProfile
from .svm_index import predict_top_categories, reduce_search_space
from .weighting import FeedbackContext, method1_relevant_ratio, method2_mean_difference

COLUMNS = DESCRIPTOR_NAMES + ("combined",)


@dataclass
class EvalConfig:
    n_queries: int = 50
    seed: int = 7
    metrics: tuple = METRIC_IDS
    modes: tuple = ("single", "combined")
    method: str = "ratio"
    oracle: str = "gt"
    prune: bool = True

    def __post_init__(self):
        unknown = set(self.metrics) - set(METRIC_IDS)
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
        unknown = set(self.modes) - {"single", "combined"}
        if unknown:
            raise ValueError(f"unknown modes: {sorted(unknown)}")
        if self.method not in ("ratio", "meandiff"):
            raise ValueError(f"unknown weighting method: {self.method!r}")


@dataclass
class EvalReport:
    """Averaged curves keyed by (metric, column) plus per-query AUC rows."""

    config: EvalConfig
    query_ids: list
    curves: dict = field(default_factory=dict)
    per_query: list = field(default_factory=list)

    def auc(self, metric, column):
        return self.curves[(metric, column)].auc


def _query_pool(db, model, query_rec, prune):
    if prune:
        top = predict_top_categories(model, query_rec.desc)
        labels = [lab for lab, _ in top]
        return reduce_search_space(db, labels, exclude_id=query_rec.id)
    return [r.id for r in db.records if r.id != query_rec.id]


def batch_evaluate(db, model, config=EvalConfig()):
    """Evaluate retrieval over a random sample of test queries."""
    by_id = {r.id: r for r in db.records}
    test_ids = sorted(db.split.test_ids)
    rng = np.random.default_rng(config.seed)
    n = min(config.n_queries, len(test_ids))
    sample = list(rng.choice(test_ids, size=n, replace=False)) if n else []
    sample = [int(i) for i in sample]

    report = EvalReport(config=config, query_ids=sample)
    collected = {}
    for metric in config.metrics:
        for qid in sample:
            rec = by_id[qid]
            relevant = frozenset(
                r.id for r in db.records if r.label == rec.label and r.id != qid
            )
            pool = _query_pool(db, model, rec, config.prune)
            candidates = [(i, by_id[i].label, by_id[i].desc) for i in pool]
            profile = DistanceProfile.build(rec.desc, candidates, metric)

            columns = {}
            if "single" in config.modes:
                for f, name in enumerate(DESCRIPTOR_NAMES):
                    columns[name] = pr_curve(profile.solo_rank(f), relevant)
            if "combined" in config.modes:
                ctx = FeedbackContext(
                    db=db,
                    profile=profile,
                    query_id=qid,
                    query_label=rec.label,
                    oracle=config.oracle,
                )
                if config.method == "ratio":
                    wvec, _ = method1_relevant_ratio(ctx)
                else:
                    wvec, _ = method2_mean_difference(ctx)
                columns["combined"] = pr_curve(profile.rank(wvec.as_array()), relevant)

            for col, curve in columns.items():
                collected.setdefault((metric, col), []).append(curve)
                report.per_query.append(
                    {
                        "query_id": qid,
                        "label": rec.label,
                        "metric": metric,
                        "column": col,
                        "auc": curve.auc,
                    }
                )
    for key, curves in collected.items():
        report.curves[key] = average_curves(curves)
    return report


def auc_table(report):
    """Rows of the AUC summary: one per metric, one column per mode."""
    rows = []
    for metric in report.config.metrics:
        row = {"metric": metric}
        for col in COLUMNS:
            key = (metric, col)
            row[col] = report.curves[key].auc if key in report.curves else None
        rows.append(row)
    return rows


def write_auc_csv(report, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["metric", *COLUMNS])
    for row in auc_table(report):
        writer.writerow(
            [row["metric"]]
            + ["" if row[c] is None else f"{row[c]:.4f}" for c in COLUMNS]
        )


def write_per_query_csv(report, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["query_id", "label", "metric", "column", "auc"])
    for row in report.per_query:
        writer.writerow(
            [row["query_id"], row["label"], row["metric"], row["column"], f"{row['auc']:.4f}"]
        )


_SVG_COLORS = {
    "cdh": "#1f77b4",
    "lbp": "#ff7f0e",
    "cld": "#2ca02c",
    "eoh": "#9467bd",
    "combined": "#d62728",
}


def _svg_panel(report, metric, ox, oy, w, h):
    parts = [
        f'<rect x="{ox}" y="{oy}" width="{w}" height="{h}" fill="none" stroke="#333"/>',
        f'<text x="{ox + w / 2:.1f}" y="{oy - 6}" font-size="12" text-anchor="middle" '
        f'font-family="monospace">{metric}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        x = ox + frac * w
        y = oy + h - frac * h
        parts.append(
            f'<text x="{x:.1f}" y="{oy + h + 14}" font-size="9" text-anchor="middle" '
            f'font-family="monospace">{frac:.1f}</text>'
        )
        parts.append(
            f'<text x="{ox - 6}" y="{y + 3:.1f}" font-size="9" text-anchor="end" '
            f'font-family="monospace">{frac:.1f}</text>'
        )
    for col in COLUMNS:
        curve = report.curves.get((metric, col))
        if curve is None:
            continue
        pts = " ".join(
            f"{ox + r * w:.2f},{oy + h - p * h:.2f}"
            for r, p in zip(RECALL_GRID, curve.precision)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{_SVG_COLORS[col]}" stroke-width="1.5"/>'
        )
    return parts


def write_pr_svg(report, stream):
    """Hand-rolled SVG: one PR panel per metric plus a shared legend."""
    panel_w, panel_h = 320, 240
    margin = 50
    metrics = list(report.config.metrics)
    width = margin * 2 + panel_w
    height = margin + len(metrics) * (panel_h + margin) + 30
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{max(height, 120)}">'
    ]
    for i, metric in enumerate(metrics):
        oy = margin + i * (panel_h + margin)
        parts.extend(_svg_panel(report, metric, margin, oy, panel_w, panel_h))
    lx = margin
    ly = max(height, 120) - 12
    for col in COLUMNS:
        parts.append(
            f'<rect x="{lx}" y="{ly - 9}" width="10" height="10" fill="{_SVG_COLORS[col]}"/>'
        )
        parts.append(
            f'<text x="{lx + 14}" y="{ly}" font-size="10" font-family="monospace">{col}</text>'
        )
        lx += 14 + 9 * len(col) + 16
    parts.append("</svg>")
    stream.write("\n".join(parts) + "\n")


def emit_report(report, out_dir):
    """Write auc.csv, per_query.csv, and pr_curves.svg into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for name, writer in (
        ("auc.csv", write_auc_csv),
        ("per_query.csv", write_per_query_csv),
        ("pr_curves.svg", write_pr_svg),
    ):
        buf = io.StringIO()
        writer(report, buf)
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
        paths[name] = path
    return paths
