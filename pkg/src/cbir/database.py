"""Feature database: build, extract, and binary persistence.

File layout: the magic bytes "CBIR", a little-endian u32 format version,
then tagged sections (4-byte ASCII tag, u64 LE payload length, payload),
and finally a u32 CRC32 checksum of every preceding byte.  Readers skip
sections with unknown tags, so the format can grow without breaking old
files.  Records store descriptor vectors as raw little-endian f64, so a
save/load cycle is bitwise exact.
"""

import datetime
import json
import os
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .descriptors import TOTAL_DIM, DescriptorSet, compute_all, descriptor_config
from .errors import ChecksumMismatch, DatabaseLocked, FormatVersionMismatch
from .ingest import SplitAssignment, ingest_corpus, load_and_resize
from .svm_index import CategoryModel, IndexModel, TrainConfig

MAGIC = b"CBIR"
FORMAT_VERSION = 1

_TAG_HEADER = b"HEAD"
_TAG_RECORDS = b"RECS"
_TAG_SPLIT = b"SPLT"
_TAG_MODEL = b"MODL"


@dataclass
class Record:
    """One image in the database; desc is None until extraction."""

    id: int
    label: str
    path: str
    desc: DescriptorSet = None


@dataclass
class FeatureDatabase:
    header: dict
    records: list
    split: SplitAssignment = None
    model: IndexModel = None

    @property
    def labels(self):
        return sorted(set(r.label for r in self.records))


def _corpus_timestamp(root, records):
    """Newest image mtime, or SOURCE_DATE_EPOCH when set, as ISO text."""
    env = os.environ.get("SOURCE_DATE_EPOCH")
    if env:
        ts = int(env)
    else:
        ts = max(
            int(os.path.getmtime(os.path.join(root, r.path))) for r in records
        )
    return datetime.datetime.fromtimestamp(ts, datetime.timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def build_database(root, seed=42):
    """Scan a corpus directory into a database shell (no features yet)."""
    images, split = ingest_corpus(root, seed=seed)
    records = [Record(id=im.id, label=im.label, path=im.path) for im in images]
    header = {
        "format": "cbir-feature-db",
        "version": FORMAT_VERSION,
        "corpus_root": os.path.abspath(root),
        "created_at": _corpus_timestamp(root, records),
        "seed": seed,
        "n_images": len(records),
        "classes": sorted(set(r.label for r in records)),
        "descriptor_config": descriptor_config(),
    }
    return FeatureDatabase(header=header, records=records, split=split)


def resolve_path(db, rel_path, root=None):
    base = root if root is not None else db.header["corpus_root"]
    return os.path.join(base, rel_path)


def _worker_count():
    env = os.environ.get("CBIR_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def extract_features(db, root=None):
    """Compute all four descriptors for every record, in place.

    Parallelism is capped by the CBIR_THREADS environment variable;
    results are merged in record order either way.
    """
    paths = [resolve_path(db, r.path, root) for r in db.records]

    def job(path):
        return compute_all(load_and_resize(path))

    workers = _worker_count()
    if workers == 1:
        sets = [job(p) for p in paths]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sets = list(pool.map(job, paths))
    for rec, ds in zip(db.records, sets):
        rec.desc = ds
    return db


def _pack_section(tag, payload):
    return tag + struct.pack("<Q", len(payload)) + payload


def _json_bytes(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _pack_records(records):
    out = [struct.pack("<I", len(records))]
    for r in records:
        label = r.label.encode("utf-8")
        path = r.path.encode("utf-8")
        out.append(struct.pack("<IHH", r.id, len(label), len(path)))
        out.append(label)
        out.append(path)
        if r.desc is None:
            out.append(b"\x00")
        else:
            out.append(b"\x01")
            out.append(r.desc.concat().astype("<f8").tobytes())
    return b"".join(out)


def _unpack_records(payload):
    (count,) = struct.unpack_from("<I", payload, 0)
    offset = 4
    records = []
    for _ in range(count):
        rid, label_len, path_len = struct.unpack_from("<IHH", payload, offset)
        offset += 8
        label = payload[offset : offset + label_len].decode("utf-8")
        offset += label_len
        path = payload[offset : offset + path_len].decode("utf-8")
        offset += path_len
        has_desc = payload[offset]
        offset += 1
        desc = None
        if has_desc:
            vec = np.frombuffer(payload, dtype="<f8", count=TOTAL_DIM, offset=offset)
            offset += TOTAL_DIM * 8
            desc = DescriptorSet.from_concat(vec.astype(np.float64))
        records.append(Record(id=rid, label=label, path=path, desc=desc))
    return records


def _model_payload(model):
    return _json_bytes(
        {
            "config": {
                "c": model.config.c,
                "epochs": model.config.epochs,
                "seed": model.config.seed,
                "top_k": model.config.top_k,
            },
            "scaler_min": model.scaler_min.tolist(),
            "scaler_max": model.scaler_max.tolist(),
            "test_accuracy": model.test_accuracy,
            "models": [
                {"label": m.label, "bias": m.bias, "weights": m.weights.tolist()}
                for m in model.models
            ],
        }
    )


def _model_from_payload(payload):
    obj = json.loads(payload.decode("utf-8"))
    cfg = obj["config"]
    return IndexModel(
        models=[
            CategoryModel(
                label=m["label"],
                weights=np.array(m["weights"], dtype=np.float64),
                bias=float(m["bias"]),
            )
            for m in obj["models"]
        ],
        scaler_min=np.array(obj["scaler_min"], dtype=np.float64),
        scaler_max=np.array(obj["scaler_max"], dtype=np.float64),
        config=TrainConfig(
            c=cfg["c"], epochs=cfg["epochs"], seed=cfg["seed"], top_k=cfg["top_k"]
        ),
        test_accuracy=float(obj["test_accuracy"]),
    )


def serialize_database(db):
    """The full binary file image, checksum included."""
    body = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    body.append(_pack_section(_TAG_HEADER, _json_bytes(db.header)))
    body.append(_pack_section(_TAG_RECORDS, _pack_records(db.records)))
    if db.split is not None:
        payload = _json_bytes(
            {
                "train_ids": sorted(db.split.train_ids),
                "test_ids": sorted(db.split.test_ids),
                "seed": db.split.seed,
            }
        )
        body.append(_pack_section(_TAG_SPLIT, payload))
    if db.model is not None:
        body.append(_pack_section(_TAG_MODEL, _model_payload(db.model)))
    raw = b"".join(body)
    return raw + struct.pack("<I", zlib.crc32(raw))


def deserialize_database(blob):
    """Parse a binary file image back into a FeatureDatabase."""
    if len(blob) < len(MAGIC) + 8 or blob[: len(MAGIC)] != MAGIC:
        raise FormatVersionMismatch("not a CBIR feature database")
    (stored_crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) != stored_crc:
        raise ChecksumMismatch("checksum mismatch: file is truncated or corrupt")
    (version,) = struct.unpack_from("<I", blob, len(MAGIC))
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"unsupported format version {version}, expected {FORMAT_VERSION}"
        )
    offset = len(MAGIC) + 4
    end = len(blob) - 4
    header = None
    records = []
    split = None
    model = None
    while offset < end:
        if offset + 12 > end:
            raise ChecksumMismatch("section header extends past end of file")
        tag = blob[offset : offset + 4]
        (length,) = struct.unpack_from("<Q", blob, offset + 4)
        offset += 12
        payload = blob[offset : offset + length]
        if len(payload) != length:
            raise ChecksumMismatch("section extends past end of file")
        offset += length
        if tag == _TAG_HEADER:
            header = json.loads(payload.decode("utf-8"))
        elif tag == _TAG_RECORDS:
            records = _unpack_records(payload)
        elif tag == _TAG_SPLIT:
            obj = json.loads(payload.decode("utf-8"))
            split = SplitAssignment(
                train_ids=set(obj["train_ids"]),
                test_ids=set(obj["test_ids"]),
                seed=obj["seed"],
            )
        elif tag == _TAG_MODEL:
            model = _model_from_payload(payload)
        # Unknown tags are skipped so newer files still load.
    if header is None:
        raise FormatVersionMismatch("missing header section")
    if header.get("n_images") != len(records):
        raise ChecksumMismatch(
            f"header declares {header.get('n_images')} records, found {len(records)}"
        )
    current = descriptor_config()
    if header.get("descriptor_config") != current:
        raise FormatVersionMismatch(
            "database was built with different descriptor constants"
        )
    return FeatureDatabase(header=header, records=records, split=split, model=model)


def save_database(db, path):
    """Serialize to path under an exclusive lockfile; atomic replace."""
    lock = str(path) + ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise DatabaseLocked(f"database is locked by another writer: {lock}")
    try:
        os.close(fd)
        tmp = str(path) + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(serialize_database(db))
        os.replace(tmp, path)
    finally:
        os.unlink(lock)
    return path


def load_database(path):
    with open(path, "rb") as fh:
        return deserialize_database(fh.read())


def export_json(db):
    """A JSON-friendly dict mirror of the whole database."""
    out = {
        "header": db.header,
        "records": [
            {
                "id": r.id,
                "label": r.label,
                "path": r.path,
                "descriptors": None if r.desc is None else {
                    "cdh": r.desc.cdh.tolist(),
                    "lbp": r.desc.lbp.tolist(),
                    "cld": r.desc.cld.tolist(),
                    "eoh": r.desc.eoh.tolist(),
                },
            }
            for r in db.records
        ],
    }
    if db.split is not None:
        out["split"] = {
            "train_ids": sorted(db.split.train_ids),
            "test_ids": sorted(db.split.test_ids),
            "seed": db.split.seed,
        }
    if db.model is not None:
        out["model"] = json.loads(_model_payload(db.model).decode("utf-8"))
    return out
