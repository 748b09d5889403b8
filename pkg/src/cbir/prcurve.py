"""Precision-recall curves with standard max-interpolation.

A ranked list plus a set of relevant ids turns into precision/recall
points (one per rank), which are interpolated onto a fixed 101-point
recall grid with p(r) = max precision at recall >= r.  The area under
the interpolated curve is the trapezoidal sum over the grid.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoRelevant

# arange/100 gives the correctly rounded double for every i/100, so a
# recall value that mathematically equals a grid point compares equal.
RECALL_GRID = np.arange(101) / 100.0


@dataclass
class PRCurve:
    recall: np.ndarray
    precision: np.ndarray
    auc: float


def _trapezoid_auc(precision):
    inner = precision[1:-1].sum()
    return float((0.5 * precision[0] + inner + 0.5 * precision[-1]) / 100.0)


def pr_curve(ranking, relevant):
    """Interpolated PR curve for a ranked list of ids.

    relevant is the full ground-truth set; ids missing from the ranking
    still count in the recall denominator, so a pruned pool that lost
    relevant images caps the maximum achievable recall.  Grid points
    beyond that maximum get precision 0.
    """
    relevant = set(relevant)
    if not relevant:
        raise NoRelevant("relevant set is empty")
    ids = list(ranking)
    if not ids:
        precision = np.zeros(RECALL_GRID.shape[0])
        return PRCurve(RECALL_GRID.copy(), precision, _trapezoid_auc(precision))

    flags = np.fromiter((i in relevant for i in ids), dtype=bool, count=len(ids))
    hits = np.cumsum(flags)
    ranks = np.arange(1, len(ids) + 1, dtype=np.float64)
    prec = hits / ranks
    rec = hits / len(relevant)

    # Best precision achievable at this recall level or beyond.
    best_right = np.maximum.accumulate(prec[::-1])[::-1]
    first_at = np.searchsorted(rec, RECALL_GRID, side="left")
    reachable = first_at < len(ids)
    precision = np.where(reachable, best_right[np.minimum(first_at, len(ids) - 1)], 0.0)
    return PRCurve(RECALL_GRID.copy(), precision, _trapezoid_auc(precision))


def pr_auc(ranking, relevant):
    """Convenience wrapper returning only the area under the curve."""
    return pr_curve(ranking, relevant).auc


def average_curves(curves):
    """Pointwise mean of several PR curves on the shared recall grid."""
    if not curves:
        raise ValueError("cannot average zero curves")
    stack = np.stack([c.precision for c in curves])
    mean = stack.mean(axis=0)
    return PRCurve(RECALL_GRID.copy(), mean, _trapezoid_auc(mean))
