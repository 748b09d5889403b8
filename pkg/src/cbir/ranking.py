"""Combined-distance ranking of a candidate pool against one query.

The combined distance is a weighted sum of per-descriptor distances,
each min-max normalized over the current candidate pool so that the
four descriptors contribute on a common [0, 1] scale before weighting.
"""

from dataclasses import dataclass

import numpy as np

from .descriptors import DESCRIPTOR_NAMES
from .errors import EmptyCandidatePool
from .metrics import normalize_distances, resolve_metric


@dataclass
class DistanceProfile:
    """Raw and pool-normalized distances from one query to each candidate.

    Rows of the distance matrices follow DESCRIPTOR_NAMES order
    (cdh, lbp, cld, eoh); columns follow the ids array.
    """

    ids: np.ndarray
    labels: list
    raw: np.ndarray
    normalized: np.ndarray
    metric: str

    @classmethod
    def build(cls, query_set, candidates, metric="canberra"):
        """Compute all per-descriptor distances for (id, label, DescriptorSet) triples."""
        if not candidates:
            raise EmptyCandidatePool("no candidates to rank")
        fn = resolve_metric(metric)
        metric_name = metric if isinstance(metric, str) else getattr(metric, "__name__", "custom")
        ids = np.array([c[0] for c in candidates])
        labels = [c[1] for c in candidates]
        q = query_set.vectors()
        raw = np.empty((len(DESCRIPTOR_NAMES), len(candidates)))
        for j, (_, _, ds) in enumerate(candidates):
            vecs = ds.vectors()
            for f in range(len(DESCRIPTOR_NAMES)):
                raw[f, j] = fn(q[f], vecs[f])
        normalized = np.stack([normalize_distances(row) for row in raw])
        return cls(ids=ids, labels=labels, raw=raw, normalized=normalized, metric=metric_name)

    def combined(self, weights):
        """Weighted sum of normalized per-descriptor distances."""
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (len(DESCRIPTOR_NAMES),):
            raise ValueError(f"expected {len(DESCRIPTOR_NAMES)} weights, got {weights.shape}")
        return weights @ self.normalized

    def rank(self, weights):
        """Candidate ids by ascending combined distance, ties by id."""
        dist = self.combined(weights)
        order = np.lexsort((self.ids, dist))
        return self.ids[order]

    def solo_rank(self, descriptor):
        """Candidate ids ranked by a single descriptor's distance alone."""
        f = descriptor if isinstance(descriptor, int) else DESCRIPTOR_NAMES.index(descriptor)
        order = np.lexsort((self.ids, self.normalized[f]))
        return self.ids[order]


def pool_norms(raw_distances):
    """(min, max) per descriptor row, the normalization constants of a pool."""
    return [(float(row.min()), float(row.max())) for row in raw_distances]


def combined_distance(query_set, candidate_set, weights, metric, norms):
    """Single-pair combined distance given precomputed pool norms.

    norms holds one (min, max) tuple per descriptor, as produced by
    pool_norms over the raw distances of the full candidate pool.
    """
    fn = resolve_metric(metric)
    weights = np.asarray(weights, dtype=np.float64)
    q = query_set.vectors()
    c = candidate_set.vectors()
    total = 0.0
    for f in range(len(DESCRIPTOR_NAMES)):
        d = fn(q[f], c[f])
        lo, hi = norms[f]
        nd = 0.0 if hi == lo else (d - lo) / (hi - lo)
        total += weights[f] * nd
    return total
