"""Corpus loading: scan a directory-per-class tree, decode, resize, split.

The canonical working size is 256 x 256 RGB.  Splits are stratified per
class at a 60/40 train/test ratio and fully determined by the seed.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .errors import ClassTooSmall, DecodeError, EmptyCorpus, UnreadableDirectory

log = logging.getLogger(__name__)

CANONICAL_SIZE = 256
IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp"}
TRAIN_FRACTION = 0.6
DEFAULT_SEED = 42


@dataclass
class ImageRecord:
    """One corpus image: identity, class label and decoded pixels."""

    id: int
    path: str
    label: str
    pixels: np.ndarray | None = None


@dataclass
class SplitAssignment:
    """Disjoint train/test id sets produced by a seeded stratified shuffle."""

    train_ids: set = field(default_factory=set)
    test_ids: set = field(default_factory=set)
    seed: int = DEFAULT_SEED


def scan_corpus(root):
    """Enumerate (path, label) pairs under root/<class>/<image>.

    Classes and files are visited in lexicographic order.  Files without a
    recognized image extension are skipped with a warning, and classes left
    with fewer than two candidate files are dropped with a warning.
    """
    root = Path(root)
    try:
        if not root.is_dir():
            raise UnreadableDirectory(f"corpus root is not a directory: {root}")
        class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    except OSError as exc:
        raise UnreadableDirectory(f"cannot read corpus root {root}: {exc}") from exc

    entries = []
    skipped = 0
    for class_dir in class_dirs:
        try:
            files = sorted(p for p in class_dir.iterdir() if p.is_file())
        except OSError as exc:
            raise UnreadableDirectory(f"cannot read {class_dir}: {exc}") from exc
        images = []
        for f in files:
            if f.suffix.lower() in IMAGE_EXTENSIONS:
                images.append(f)
            else:
                skipped += 1
                log.warning("skipping non-image file %s", f)
        if len(images) < 2:
            log.warning(
                "dropping class %r: only %d image file(s)", class_dir.name, len(images)
            )
            continue
        entries.extend((f, class_dir.name) for f in images)
    if skipped:
        log.warning("skipped %d non-image file(s)", skipped)
    if not entries:
        raise EmptyCorpus(f"no class under {root} has at least 2 images")
    return entries


def load_and_resize(path, size=CANONICAL_SIZE):
    """Decode an image file as RGB and bilinearly resample to size x size.

    Grayscale sources come back replicated across the three channels; an
    input already at the target size passes through untouched.
    """
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise DecodeError(f"cannot decode image: {path}")
    rgb = cv2.cvtColor(img, cv2.COLOR_BGR2RGB)
    if rgb.shape[0] == size and rgb.shape[1] == size:
        return rgb
    return cv2.resize(rgb, (size, size), interpolation=cv2.INTER_LINEAR)


def make_split(labels, seed=DEFAULT_SEED):
    """Stratified 60/40 split of {id: label}, deterministic for a seed.

    Per class the train share is round(0.6 * n) with halves rounding up,
    so the smaller rounding share always lands in the test set.
    """
    by_class = {}
    for img_id in sorted(labels):
        by_class.setdefault(labels[img_id], []).append(img_id)
    for label, ids in by_class.items():
        if len(ids) < 2:
            raise ClassTooSmall(f"class {label!r} has {len(ids)} image(s), need >= 2")

    rng = np.random.default_rng(seed)
    split = SplitAssignment(seed=seed)
    for label in sorted(by_class):
        ids = np.array(by_class[label])
        rng.shuffle(ids)
        n_train = int(np.floor(TRAIN_FRACTION * len(ids) + 0.5))
        split.train_ids.update(int(i) for i in ids[:n_train])
        split.test_ids.update(int(i) for i in ids[n_train:])
    return split


def ingest_corpus(root, seed=DEFAULT_SEED):
    """Scan, decode-check and split a corpus.

    Returns (records, split) where record paths are stored relative to the
    corpus root.  Files that fail to decode are skipped with a warning, and
    classes that drop below two decodable images are discarded.
    """
    root = Path(root)
    entries = scan_corpus(root)

    decodable = []
    for path, label in entries:
        try:
            load_and_resize(path)
        except DecodeError:
            log.warning("skipping undecodable image %s", path)
            continue
        decodable.append((path, label))

    counts = {}
    for _, label in decodable:
        counts[label] = counts.get(label, 0) + 1
    kept = [(p, lab) for p, lab in decodable if counts[lab] >= 2]
    for label, n in sorted(counts.items()):
        if n < 2:
            log.warning("dropping class %r: only %d decodable image(s)", label, n)
    if not kept:
        raise EmptyCorpus(f"no class under {root} has at least 2 decodable images")

    records = [
        ImageRecord(id=i, path=str(path.relative_to(root)), label=label)
        for i, (path, label) in enumerate(kept)
    ]
    split = make_split({r.id: r.label for r in records}, seed=seed)
    return records, split
