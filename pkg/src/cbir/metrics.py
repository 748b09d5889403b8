"""Distance metrics between feature vectors and distance normalization.

Three metrics are supported for ranking: the mean-augmented Canberra
distance, the chi-square distance, and the Euclidean distance.  The
Canberra and Euclidean forms are also available in an "as printed"
variant that reproduces a plus-sign numerator and a missing square
respectively; those variants break metric axioms and exist only for
comparison, never for ranking by default.
"""

import numpy as np

from .errors import LengthMismatch

METRIC_IDS = ("canberra", "chisq", "euclid")


def _pair(h1, h2):
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if h1.shape != h2.shape or h1.ndim != 1 or h1.size == 0:
        raise LengthMismatch(f"vector shapes differ: {h1.shape} vs {h2.shape}")
    return h1, h2


def canberra(h1, h2, as_printed=False):
    """Mean-augmented Canberra distance.

    D = sum |h1_i - h2_i| / (|h1_i + mean(h1)| + |h2_i + mean(h2)|),
    terms with a zero denominator contribute nothing.  With as_printed=True
    the numerator uses a plus sign, which makes D(h, h) nonzero.
    """
    h1, h2 = _pair(h1, h2)
    u1 = h1.mean()
    u2 = h2.mean()
    num = np.abs(h1 + h2) if as_printed else np.abs(h1 - h2)
    den = np.abs(h1 + u1) + np.abs(h2 + u2)
    ok = den != 0.0
    return float(np.sum(num[ok] / den[ok]))


def chi_square(h1, h2):
    """Chi-square distance: sum (h1_i - h2_i)^2 / ((h1_i + h2_i) / 2)."""
    h1, h2 = _pair(h1, h2)
    den = (h1 + h2) / 2.0
    ok = den != 0.0
    diff = h1[ok] - h2[ok]
    return float(np.sum(diff * diff / den[ok]))


def euclidean(h1, h2, as_printed=False):
    """Euclidean distance; as_printed takes the square root of the L1 sum."""
    h1, h2 = _pair(h1, h2)
    if as_printed:
        return float(np.sqrt(np.sum(np.abs(h1 - h2))))
    return float(np.sqrt(np.sum((h1 - h2) ** 2)))


METRICS = {
    "canberra": canberra,
    "chisq": chi_square,
    "euclid": euclidean,
}


def resolve_metric(metric):
    """Map a metric id to its distance function; callables pass through."""
    if callable(metric):
        return metric
    try:
        return METRICS[metric]
    except KeyError:
        raise ValueError(
            f"unknown metric {metric!r}; expected one of {METRIC_IDS}"
        ) from None


def normalize_distances(raw):
    """Min-max normalize a distance array onto [0, 1].

    A degenerate candidate set (all distances equal, including a singleton)
    maps to all zeros.
    """
    raw = np.asarray(raw, dtype=np.float64)
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        return np.zeros_like(raw)
    return (raw - lo) / (hi - lo)
