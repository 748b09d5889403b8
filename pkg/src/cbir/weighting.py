"""Automatic per-query descriptor weighting.

Two schemes share the same starting point: each descriptor's standalone
retrieval quality (PR area under curve) for the query at hand, unit
normalized, gives the initial weight vector.

Method 1 (relevant ratio) multiplies each weight by an increment factor
scaled by the ratio of that descriptor's relevant count to the combined
ranking's relevant count inside a feedback window of K results, then
renormalizes, iterating until the combined relevant count stops
improving.

Method 2 (mean difference) repeatedly shifts a fixed fraction of weight
mass onto the single best descriptor, proportionally draining the
others, and keeps whichever iterate scored the best PR area.

Relevance comes either from ground-truth class labels or from a pseudo
oracle that trusts the top results of an unweighted first pass.
"""

from dataclasses import dataclass, field

import numpy as np

from .descriptors import DESCRIPTOR_NAMES
from .errors import EmptyCandidatePool
from .prcurve import pr_auc
from .ranking import DistanceProfile

DEFAULT_INCREMENT_FACTOR = 1.1
DEFAULT_FEEDBACK_K = 10
DEFAULT_PATIENCE = 3
DEFAULT_MAX_ITER = 20
DEFAULT_PSEUDO_TOP_N = 5
METHOD2_STEP = 0.05


@dataclass(frozen=True)
class WeightVector:
    """Non-negative per-descriptor weights in DESCRIPTOR_NAMES order."""

    cdh: float
    lbp: float
    cld: float
    eoh: float

    def __post_init__(self):
        arr = self.as_array()
        if np.any(arr < 0.0):
            raise ValueError("weights must be non-negative")
        if not np.any(arr > 0.0):
            raise ValueError("at least one weight must be positive")

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.shape != (4,):
            raise ValueError(f"expected 4 weights, got shape {arr.shape}")
        return cls(*(float(v) for v in arr))

    @classmethod
    def uniform(cls):
        return cls(0.25, 0.25, 0.25, 0.25)

    def as_array(self):
        return np.array([self.cdh, self.lbp, self.cld, self.eoh])

    def as_dict(self):
        return dict(zip(DESCRIPTOR_NAMES, self.as_array()))

    def normalize(self):
        arr = self.as_array()
        return WeightVector.from_array(arr / arr.sum())


@dataclass
class Method1Step:
    """One trace row of the relevant-ratio iteration."""

    iteration: int
    weights: tuple
    k_c: int
    kc_substituted: bool = False


@dataclass
class Method2Step:
    """One trace row of the mean-difference sweep."""

    iteration: int
    weights: tuple
    auc: float


@dataclass
class FeedbackContext:
    """Everything the weighting schemes need to judge a ranking.

    The relevant set is resolved once and reused: ground truth takes all
    same-class images in the whole database (minus the query itself);
    the pseudo oracle takes the top pseudo_top_n of an unweighted pass
    over the candidate pool.
    """

    db: object
    profile: DistanceProfile
    query_id: int = None
    query_label: str = None
    oracle: str = "gt"
    feedback_k: int = DEFAULT_FEEDBACK_K
    increment_factor: float = DEFAULT_INCREMENT_FACTOR
    pseudo_top_n: int = DEFAULT_PSEUDO_TOP_N
    _relevant: frozenset = field(default=None, repr=False)

    def __post_init__(self):
        if self.oracle not in ("gt", "pseudo"):
            raise ValueError(f"unknown relevance oracle: {self.oracle!r}")
        if self.feedback_k < 1:
            raise ValueError("feedback window must be at least 1")
        if self.increment_factor <= 1.0:
            raise ValueError("increment factor must be greater than 1")
        if self.profile.ids.shape[0] == 0:
            raise EmptyCandidatePool("feedback needs a non-empty candidate pool")

    @property
    def relevant(self):
        if self._relevant is None:
            if self.oracle == "gt":
                label = self.query_label
                if label is None and self.query_id is not None:
                    label = next(r.label for r in self.db.records if r.id == self.query_id)
                if label is None:
                    raise ValueError("ground-truth oracle needs a query label or id")
                ids = frozenset(
                    r.id
                    for r in self.db.records
                    if r.label == label and r.id != self.query_id
                )
            else:
                first_pass = self.profile.rank(WeightVector.uniform().as_array())
                ids = frozenset(first_pass[: self.pseudo_top_n].tolist())
            self._relevant = ids
        return self._relevant


def relevant_count(ranking, ctx):
    """How many of the first feedback_k results are relevant."""
    window = list(ranking)[: ctx.feedback_k]
    relevant = ctx.relevant
    return sum(1 for i in window if i in relevant)


def weights_from_aucs(aucs):
    """Unit-normalize per-descriptor AUC scores into weights.

    All-zero scores carry no signal, so they fall back to uniform.
    """
    arr = np.asarray(aucs, dtype=np.float64)
    if arr.shape != (4,):
        raise ValueError(f"expected 4 AUC values, got shape {arr.shape}")
    if np.any(arr < 0.0):
        raise ValueError("AUC values must be non-negative")
    total = arr.sum()
    if total == 0.0:
        return WeightVector.uniform()
    return WeightVector.from_array(arr / total)


def initial_weights(ctx):
    """Per-descriptor solo PR-AUC scores, unit normalized."""
    aucs = [
        pr_auc(ctx.profile.solo_rank(f), ctx.relevant)
        for f in range(len(DESCRIPTOR_NAMES))
    ]
    return weights_from_aucs(aucs)


def relevant_ratio_update(weight, increment_factor, k_f, k_c):
    """One multiplicative update of a single descriptor weight.

    A zero combined count would leave the ratio undefined; it is
    replaced by 1 so the update stays finite.
    """
    if k_c == 0:
        k_c = 1
    return weight * increment_factor * (k_f / k_c)


def method1_relevant_ratio(
    ctx,
    patience=DEFAULT_PATIENCE,
    max_iter=DEFAULT_MAX_ITER,
):
    """Relevant-ratio weight learning; returns (weights, trace).

    Keeps the weight vector with the best combined relevant count seen,
    earliest iteration winning ties.  The trace records every evaluated
    weight vector with its count.
    """
    w = initial_weights(ctx).as_array()
    k_f = [
        relevant_count(ctx.profile.solo_rank(f), ctx)
        for f in range(len(DESCRIPTOR_NAMES))
    ]

    k_c = relevant_count(ctx.profile.rank(w), ctx)
    trace = [Method1Step(iteration=0, weights=tuple(w), k_c=k_c)]
    best_kc, best_w = k_c, w
    stale = 0
    for it in range(1, max_iter + 1):
        substituted = k_c == 0
        w_new = np.array([
            relevant_ratio_update(w[f], ctx.increment_factor, k_f[f], k_c)
            for f in range(len(DESCRIPTOR_NAMES))
        ])
        total = w_new.sum()
        if total == 0.0:
            # No descriptor found anything relevant; weights carry no signal.
            w_new = WeightVector.uniform().as_array()
        else:
            w_new = w_new / total
        w = w_new
        k_c = relevant_count(ctx.profile.rank(w), ctx)
        trace.append(
            Method1Step(iteration=it, weights=tuple(w), k_c=k_c, kc_substituted=substituted)
        )
        if k_c > best_kc:
            best_kc, best_w = k_c, w
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break
    return WeightVector.from_array(best_w), trace


def method2_mean_difference(ctx, step=METHOD2_STEP):
    """Mean-difference weight sweep; returns (weights, trace).

    Starting from the initial weights, shifts `step` of total mass per
    iteration onto the best descriptor (ties broken in cdh, lbp, cld,
    eoh order), draining the others proportionally, until that
    descriptor holds all the mass.  Returns the iterate with the best
    PR area; ties go to the fewest iterations.
    """
    w = initial_weights(ctx).as_array()
    target = int(np.argmax(w))

    def evaluate(vec):
        return pr_auc(ctx.profile.rank(vec), ctx.relevant)

    auc = evaluate(w)
    trace = [Method2Step(iteration=0, weights=tuple(w), auc=auc)]
    best_auc, best_w = auc, w
    it = 0
    while w[target] < 1.0:
        it += 1
        others = 1.0 - w[target]
        delta = min(step, others)
        if delta >= others:
            w = np.zeros_like(w)
            w[target] = 1.0
        else:
            scale = (others - delta) / others
            head = w[target] + delta
            w = w * scale
            w[target] = head
            w = w / w.sum()
        auc = evaluate(w)
        trace.append(Method2Step(iteration=it, weights=tuple(w), auc=auc))
        if auc > best_auc:
            best_auc, best_w = auc, w
    return WeightVector.from_array(best_w), trace
