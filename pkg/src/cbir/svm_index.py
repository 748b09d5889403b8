"""Category index: one linear SVM per class for search-space pruning.

Each class gets a binary one-vs-rest SVM over the concatenated, min-max
scaled descriptor vector.  A query is scored by every class model and the
top-k classes (default 3) define the reduced candidate pool.

Training is a deterministic epoch-based subgradient descent on the
L2-regularized hinge loss (Pegasos-style schedule, full-batch updates),
so identical inputs always produce bitwise-identical models.
"""

from dataclasses import dataclass, field

import numpy as np

from .descriptors import TOTAL_DIM
from .errors import DegenerateClass, DimensionMismatch

DEFAULT_C = 1.0
DEFAULT_EPOCHS = 200
DEFAULT_TOP_K = 3


@dataclass(frozen=True)
class TrainConfig:
    c: float = DEFAULT_C
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0
    top_k: int = DEFAULT_TOP_K


@dataclass
class CategoryModel:
    """Binary one-vs-rest model for a single class."""

    label: str
    weights: np.ndarray
    bias: float

    def score(self, scaled_features):
        """Signed distance to the decision boundary for scaled features."""
        return float(self.weights @ scaled_features + self.bias)


@dataclass
class IndexModel:
    """All per-class models plus the shared feature scaler."""

    models: list
    scaler_min: np.ndarray
    scaler_max: np.ndarray
    config: TrainConfig = field(default_factory=TrainConfig)
    test_accuracy: float = float("nan")

    @property
    def labels(self):
        return [m.label for m in self.models]

    def scale(self, features):
        """Min-max scale by training statistics; flat dimensions map to 0."""
        features = np.asarray(features, dtype=np.float64)
        if features.shape[-1] != self.scaler_min.shape[0]:
            raise DimensionMismatch(
                f"feature length {features.shape[-1]} != scaler length "
                f"{self.scaler_min.shape[0]}"
            )
        span = self.scaler_max - self.scaler_min
        inv = np.where(span > 0.0, 1.0 / np.where(span > 0.0, span, 1.0), 0.0)
        return (features - self.scaler_min) * inv

    def scores(self, descriptor_set):
        """Per-class decision scores for one DescriptorSet."""
        x = self.scale(descriptor_set.concat())
        return {m.label: m.score(x) for m in self.models}


def _train_binary_svm(features, targets, c, epochs):
    """Full-batch subgradient descent on the hinge loss.

    The bias rides along as an augmented constant feature; the step size
    follows the 1/(lambda * t) schedule with lambda = 1/(c * n).
    """
    n = features.shape[0]
    lam = 1.0 / (c * n)
    x = np.hstack([features, np.ones((n, 1))])
    w = np.zeros(x.shape[1])
    for t in range(1, epochs + 1):
        margins = targets * (x @ w)
        violating = margins < 1.0
        grad = lam * w - (targets[violating] @ x[violating]) / n
        w = w - grad / (lam * t)
    return w[:-1], float(w[-1])


def train_index(db, split, config=TrainConfig()):
    """Fit one binary SVM per class on the training split of a database.

    Reports argmax top-1 accuracy on the test split in the returned model.
    """
    records = {r.id: r for r in db.records}
    train_ids = sorted(split.train_ids)
    feats = np.array([records[i].desc.concat() for i in train_ids])
    labels = [records[i].label for i in train_ids]
    classes = sorted(set(r.label for r in db.records))
    if len(classes) < 2:
        raise ValueError("need at least two classes to train an index")
    if np.all(feats.max(axis=0) == feats.min(axis=0)):
        raise DegenerateClass("all training vectors are identical")

    scaler_min = feats.min(axis=0)
    scaler_max = feats.max(axis=0)
    span = scaler_max - scaler_min
    inv = np.where(span > 0.0, 1.0 / np.where(span > 0.0, span, 1.0), 0.0)
    scaled = (feats - scaler_min) * inv

    label_arr = np.array(labels)
    models = []
    for cls in classes:
        targets = np.where(label_arr == cls, 1.0, -1.0)
        weights, bias = _train_binary_svm(scaled, targets, config.c, config.epochs)
        models.append(CategoryModel(label=cls, weights=weights, bias=bias))

    model = IndexModel(
        models=models,
        scaler_min=scaler_min,
        scaler_max=scaler_max,
        config=config,
    )
    test_ids = sorted(split.test_ids)
    if test_ids:
        hits = 0
        for i in test_ids:
            ranked = predict_top_categories(model, records[i].desc, k=1)
            hits += ranked[0][0] == records[i].label
        model.test_accuracy = hits / len(test_ids)
    return model


def order_labels(scores):
    """Labels sorted by descending score, ties broken lexicographically."""
    return sorted(scores, key=lambda lab: (-scores[lab], lab))


def predict_top_categories(model, descriptor_set, k=None):
    """The min(k, n_classes) best-scoring class labels with their scores."""
    if k is None:
        k = model.config.top_k
    scores = model.scores(descriptor_set)
    ordered = order_labels(scores)[: min(k, len(scores))]
    return [(lab, scores[lab]) for lab in ordered]


def reduce_search_space(db, labels, exclude_id=None):
    """Ids of all database images whose class is in labels, minus the query."""
    wanted = set(labels)
    return [
        r.id for r in db.records if r.label in wanted and r.id != exclude_id
    ]
