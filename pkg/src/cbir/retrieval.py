"""End-to-end query execution.

A query runs in four stages: resolve the query descriptors, prune the
candidate pool to the top categories of the SVM index (unless disabled),
pick descriptor weights (explicit, automatic, or uniform), then rank the
pool by weighted combined distance.
"""

import base64
from dataclasses import dataclass

import cv2
import numpy as np

from .descriptors import DESCRIPTOR_NAMES, compute_all
from .errors import EmptyCandidatePool
from .ingest import load_and_resize
from .ranking import DistanceProfile
from .svm_index import predict_top_categories, reduce_search_space
from .weighting import (
    FeedbackContext,
    WeightVector,
    method1_relevant_ratio,
    method2_mean_difference,
)

AUTO_METHODS = ("ratio", "meandiff")


@dataclass
class RankedEntry:
    id: int
    label: str
    path: str
    distance: float
    per_descriptor: tuple


@dataclass
class RankedList:
    """Result of one query: ordered entries plus the settings that made them."""

    entries: list
    weights: WeightVector
    metric: str
    pool_size: int
    pruned_to: list
    query_id: int = None

    @property
    def ids(self):
        return [e.id for e in self.entries]

    @property
    def labels(self):
        return [e.label for e in self.entries]


def _resolve_query(db, query):
    """Accept a database id, an image path, or a pixel array."""
    if isinstance(query, (int, np.integer)):
        rec = next((r for r in db.records if r.id == int(query)), None)
        if rec is None:
            raise KeyError(f"no record with id {query}")
        if rec.desc is None:
            raise ValueError(f"record {query} has no extracted features")
        return rec.desc, rec.label, int(query)
    if isinstance(query, np.ndarray):
        return compute_all(query), None, None
    pixels = load_and_resize(str(query))
    return compute_all(pixels), None, None


def run_query(
    db,
    query,
    model=None,
    metric="canberra",
    weights=None,
    auto_method=None,
    oracle="pseudo",
    top_n=10,
    prune=True,
):
    """Rank database images against a query image.

    weights and auto_method are mutually exclusive; with neither, all
    four descriptors weigh 0.25.  auto_method is "ratio" (relevant
    ratio) or "meandiff" (mean difference sweep); its relevance signal
    comes from `oracle`, ground truth ("gt", database queries only) or
    pseudo feedback ("pseudo").
    """
    if weights is not None and auto_method is not None:
        raise ValueError("give explicit weights or an auto method, not both")
    query_set, query_label, query_id = _resolve_query(db, query)

    pruned_to = []
    if prune:
        if model is None:
            raise ValueError("pruning requires a trained index model")
        top = predict_top_categories(model, query_set)
        pruned_to = [lab for lab, _ in top]
        pool_ids = reduce_search_space(db, pruned_to, exclude_id=query_id)
    else:
        pool_ids = [r.id for r in db.records if r.id != query_id]
    if not pool_ids:
        raise EmptyCandidatePool("candidate pool is empty after pruning")

    by_id = {r.id: r for r in db.records}
    candidates = [(i, by_id[i].label, by_id[i].desc) for i in pool_ids]
    profile = DistanceProfile.build(query_set, candidates, metric)

    if auto_method is not None:
        ctx = FeedbackContext(
            db=db,
            profile=profile,
            query_id=query_id,
            query_label=query_label,
            oracle=oracle,
        )
        if auto_method == "ratio":
            wvec, _ = method1_relevant_ratio(ctx)
        elif auto_method == "meandiff":
            wvec, _ = method2_mean_difference(ctx)
        else:
            raise ValueError(f"unknown auto method: {auto_method!r}")
    elif weights is not None:
        wvec = weights if isinstance(weights, WeightVector) else WeightVector.from_array(weights)
        wvec = wvec.normalize()
    else:
        wvec = WeightVector.uniform()

    w = wvec.as_array()
    dist = profile.combined(w)
    order = np.lexsort((profile.ids, dist))
    if top_n is not None:
        order = order[:top_n]

    entries = []
    for j in order:
        cid = int(profile.ids[j])
        entries.append(
            RankedEntry(
                id=cid,
                label=by_id[cid].label,
                path=by_id[cid].path,
                distance=float(dist[j]),
                per_descriptor=tuple(float(profile.normalized[f, j]) for f in range(4)),
            )
        )
    return RankedList(
        entries=entries,
        weights=wvec,
        metric=profile.metric,
        pool_size=len(pool_ids),
        pruned_to=pruned_to,
        query_id=query_id,
    )


def write_ranked_csv(ranked, stream):
    """Write one row per result with distances to an open text stream."""
    header = ["rank", "id", "label", "path", "distance"]
    header += [f"nd_{name}" for name in DESCRIPTOR_NAMES]
    stream.write(",".join(header) + "\n")
    for pos, e in enumerate(ranked.entries, start=1):
        row = [str(pos), str(e.id), e.label, e.path, f"{e.distance:.6f}"]
        row += [f"{v:.6f}" for v in e.per_descriptor]
        stream.write(",".join(row) + "\n")


def _thumbnail_data_uri(pixels, size=64):
    thumb = cv2.resize(pixels, (size, size), interpolation=cv2.INTER_AREA)
    ok, buf = cv2.imencode(".png", cv2.cvtColor(thumb, cv2.COLOR_RGB2BGR))
    if not ok:
        raise ValueError("PNG encoding failed")
    return "data:image/png;base64," + base64.b64encode(buf.tobytes()).decode("ascii")


def contact_sheet_svg(db, ranked, stream, root=None, query_label=None, thumb=64, pad=8):
    """Render the ranked results as an SVG contact sheet.

    Borders are green for results sharing the query's class, red for
    mismatches, gray when the query has no known class.
    """
    from .database import resolve_path

    if query_label is None and ranked.query_id is not None:
        query_label = next(r.label for r in db.records if r.id == ranked.query_id)
    per_row = 5
    n = len(ranked.entries)
    rows = max(1, (n + per_row - 1) // per_row)
    cell = thumb + pad
    width = per_row * cell + pad
    height = rows * cell + pad + 20
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{pad}" y="14" font-size="11" font-family="monospace">'
        f"metric={ranked.metric} pool={ranked.pool_size}</text>",
    ]
    for idx, e in enumerate(ranked.entries):
        x = pad + (idx % per_row) * cell
        y = 20 + pad + (idx // per_row) * cell
        pixels = load_and_resize(str(resolve_path(db, e.path, root)))
        uri = _thumbnail_data_uri(pixels, thumb)
        if query_label is None:
            color = "#888888"
        else:
            color = "#2e8b57" if e.label == query_label else "#b22222"
        parts.append(
            f'<rect x="{x - 2}" y="{y - 2}" width="{thumb + 4}" height="{thumb + 4}" '
            f'fill="none" stroke="{color}" stroke-width="3"/>'
        )
        parts.append(f'<image x="{x}" y="{y}" width="{thumb}" height="{thumb}" href="{uri}"/>')
    parts.append("</svg>")
    stream.write("\n".join(parts) + "\n")
