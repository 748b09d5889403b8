"""Comparing histograms with three distance functions.

The engine supports a mean-augmented Canberra distance, a symmetric
chi-square distance, and plain Euclidean distance.  This script shows
their values on identical, nearby, and disjoint histograms, checks the
axioms informally, and walks through how per-descriptor distances are
min-max normalized and blended into one combined score.
"""

import numpy as np

from cbir.metrics import canberra, chi_square, euclidean, normalize_distances
from cbir.ranking import DistanceProfile
from cbir.synthetic import make_image
from cbir.descriptors import compute_all

METRICS = (("canberra", canberra), ("chisq", chi_square), ("euclid", euclidean))


def main():
    rng = np.random.default_rng(21)

    base = rng.random(16)
    base /= base.sum()
    near = np.abs(base + rng.normal(0.0, 0.01, 16))
    near /= near.sum()
    disjoint = np.zeros(16)
    disjoint[: 8] = base[8:][::-1]
    disjoint /= disjoint.sum()

    print("Distances between 16-bin histograms")
    print(f"{'metric':10s} {'self':>8s} {'near':>8s} {'disjoint':>9s}")
    for name, fn in METRICS:
        print(
            f"{name:10s} {fn(base, base):8.4f} {fn(base, near):8.4f}"
            f" {fn(base, disjoint):9.4f}"
        )

    print()
    print("Symmetry check on a random pair")
    a, b = rng.random(32), rng.random(32)
    for name, fn in METRICS:
        print(f"  {name}: |D(a,b) - D(b,a)| = {abs(fn(a, b) - fn(b, a)):.2e}")

    print()
    print("From raw per-descriptor distances to one combined score")
    query = compute_all(make_image("hue", 0, rng))
    candidates = []
    for i, (archetype, variant) in enumerate(
        [("hue", 0), ("hue", 1), ("texture", 0), ("layout", 0), ("edge", 0)]
    ):
        ds = compute_all(make_image(archetype, variant, rng))
        candidates.append((i, f"{archetype}{variant}", ds))

    profile = DistanceProfile.build(query, candidates, metric="canberra")
    names = [label for _, label, _ in candidates]
    print("raw distances (rows: cdh, lbp, cld, eoh; columns: " + ", ".join(names) + ")")
    for row in profile.raw:
        print("  " + " ".join(f"{v:9.4f}" for v in row))
    print("after min-max normalization per descriptor")
    for row in profile.normalized:
        print("  " + " ".join(f"{v:9.4f}" for v in row))

    weights = np.array([0.4, 0.2, 0.2, 0.2])
    combined = profile.combined(weights)
    order = np.argsort(combined)
    print("combined with weights", weights.tolist())
    for j in order:
        print(f"  {names[j]:10s} {combined[j]:.4f}")
    print("the same-archetype candidate lands closest, as it should")

    print()
    print("normalize_distances on a degenerate all-equal row")
    print(" ", normalize_distances(np.array([3.0, 3.0, 3.0])))


if __name__ == "__main__":
    main()
