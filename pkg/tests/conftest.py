"""Shared fixtures: synthetic corpora on disk and in-memory vector databases.

The image corpora are generated once per session because descriptor
extraction over 80-odd images is the expensive part of the suite.
Vector databases skip images entirely: records get hand-built
DescriptorSets, which is enough for ranking, weighting, and evaluation
machinery.
"""

import numpy as np
import pytest

from cbir.database import FeatureDatabase, Record, build_database, extract_features
from cbir.descriptors import (
    CDH_DIM,
    CLD_DIM,
    EOH_DIM,
    LBP_DIM,
    DescriptorSet,
    descriptor_config,
)
from cbir.ingest import SplitAssignment
from cbir.svm_index import TrainConfig, train_index
from cbir.synthetic import generate_corpus


@pytest.fixture(scope="session")
def corpus4_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus4")
    generate_corpus(str(root), classes=4, per_class=20, seed=11)
    return str(root)


@pytest.fixture(scope="session")
def db4(corpus4_dir):
    db = build_database(corpus4_dir, seed=42)
    extract_features(db)
    return db


@pytest.fixture(scope="session")
def model4(db4):
    return train_index(db4, db4.split, TrainConfig())


@pytest.fixture(scope="session")
def corpus16_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus16")
    generate_corpus(str(root), classes=16, per_class=6, seed=5)
    return str(root)


@pytest.fixture(scope="session")
def db16(corpus16_dir):
    db = build_database(corpus16_dir, seed=42)
    extract_features(db)
    return db


@pytest.fixture(scope="session")
def model16(db16):
    return train_index(db16, db16.split, TrainConfig())


def random_descriptor_set(rng):
    """A valid DescriptorSet with normalized histogram parts."""

    def hist(n):
        h = rng.random(n)
        return h / h.sum()

    return DescriptorSet(
        cdh=hist(CDH_DIM),
        lbp=hist(LBP_DIM),
        cld=rng.normal(0.0, 50.0, CLD_DIM),
        eoh=hist(EOH_DIM),
    )


def perturbed(ds, rng, scale):
    """A nearby DescriptorSet: same structure, jittered entries."""

    def jitter(h):
        h = np.abs(h + rng.normal(0.0, scale, h.shape))
        return h / h.sum()

    return DescriptorSet(
        cdh=jitter(ds.cdh),
        lbp=jitter(ds.lbp),
        cld=ds.cld + rng.normal(0.0, scale * 100.0, ds.cld.shape),
        eoh=jitter(ds.eoh),
    )


def make_vector_db(n_classes=3, per_class=8, seed=0, spread=0.02, train_fraction=0.6):
    """In-memory database of clustered random descriptor vectors.

    Each class is a tight cloud around its own random anchor, so classes
    are well separated in every descriptor.  Labels are cls0, cls1, ...
    and the split is stratified like the real ingest path.
    """
    rng = np.random.default_rng(seed)
    records = []
    train_ids, test_ids = [], []
    next_id = 0
    for c in range(n_classes):
        anchor = random_descriptor_set(rng)
        class_ids = []
        for _ in range(per_class):
            records.append(
                Record(
                    id=next_id,
                    label=f"cls{c}",
                    path=f"cls{c}/img_{next_id:03d}.png",
                    desc=perturbed(anchor, rng, spread),
                )
            )
            class_ids.append(next_id)
            next_id += 1
        n_train = int(np.floor(train_fraction * per_class + 0.5))
        train_ids.extend(class_ids[:n_train])
        test_ids.extend(class_ids[n_train:])
    header = {
        "format": "cbir-feature-db",
        "version": 1,
        "corpus_root": "/nonexistent",
        "created_at": "1970-01-01T00:00:00Z",
        "seed": seed,
        "n_images": len(records),
        "classes": sorted({r.label for r in records}),
        "descriptor_config": descriptor_config(),
    }
    split = SplitAssignment(train_ids=set(train_ids), test_ids=set(test_ids), seed=seed)
    return FeatureDatabase(header=header, records=records, split=split)
