"""Named collections of (id, unit vector, metadata) with exact top-k cosine search.

Search is exact flat scan, not approximate: scores are dot products of stored
unit vectors, ties broken by ascending id, so every result is reproducible
against a brute-force oracle. Persistence is a binary vector file per
collection plus a JSON-Lines metadata sidecar, giving bit-exact float round
trips.
"""

from __future__ import annotations

import json
import os
import struct
import threading
import zlib
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .domain import Embedding
from .errors import ConflictError, CorruptStoreError, InvalidArgumentError, NotFoundError

MAGIC = b"MRVV"
FORMAT_VERSION = 1
REQUIRED_COLLECTIONS = ("keyframes", "transcripts", "summaries")

VECTOR_SUFFIX = ".mrvv"
SIDECAR_SUFFIX = ".meta.jsonl"

# filter: metadata key -> allowed value or set of values (equality / membership)
Filter = Mapping[str, "str | Iterable[str]"]


@dataclass(frozen=True)
class SearchHit:
    id: str
    score: float
    metadata: dict[str, str] = field(compare=False)


class ReadWriteLock:
    """Many concurrent readers or one writer."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writing = False

    @contextmanager
    def read(self) -> Iterator[None]:
        with self._cond:
            while self._writing:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    @contextmanager
    def write(self) -> Iterator[None]:
        with self._cond:
            while self._writing or self._readers:
                self._cond.wait()
            self._writing = True
        try:
            yield
        finally:
            with self._cond:
                self._writing = False
                self._cond.notify_all()


class _Collection:
    """In-memory record map plus a lazily rebuilt score matrix."""

    def __init__(self, name: str, dim: int):
        self.name = name
        self.dim = dim
        self.records: dict[str, tuple[np.ndarray, dict[str, str]]] = {}
        self._matrix: np.ndarray | None = None
        self._matrix_ids: list[str] = []
        self._matrix_lock = threading.Lock()

    def invalidate(self) -> None:
        self._matrix = None

    def matrix(self) -> tuple[list[str], np.ndarray]:
        """ids and a float64 (n, dim) matrix, rebuilt when stale."""
        with self._matrix_lock:
            if self._matrix is None:
                self._matrix_ids = list(self.records)
                if self._matrix_ids:
                    rows = [self.records[i][0] for i in self._matrix_ids]
                    self._matrix = np.stack(rows).astype(np.float64)
                else:
                    self._matrix = np.zeros((0, self.dim), dtype=np.float64)
            return self._matrix_ids, self._matrix


def _matches(metadata: Mapping[str, str], filter: Filter) -> bool:
    for key, allowed in filter.items():
        value = metadata.get(key)
        if isinstance(allowed, str):
            if value != allowed:
                return False
        elif value not in allowed:
            return False
    return True


class VectorStore:
    """Collections keyed by name. Thread-safe per the reader-writer contract."""

    def __init__(self) -> None:
        self._collections: dict[str, _Collection] = {}
        self._lock = ReadWriteLock()

    @classmethod
    def with_collections(cls, dims: Mapping[str, int]) -> "VectorStore":
        store = cls()
        for name, dim in dims.items():
            store.create_collection(name, dim)
        return store

    def create_collection(self, name: str, dim: int) -> None:
        if dim <= 0:
            raise InvalidArgumentError(f"collection dim must be positive, got {dim}")
        with self._lock.write():
            if name in self._collections:
                raise ConflictError(f"collection {name!r} already exists")
            self._collections[name] = _Collection(name, dim)

    def _get(self, name: str) -> _Collection:
        collection = self._collections.get(name)
        if collection is None:
            raise NotFoundError(f"unknown collection {name!r}")
        return collection

    def collection_names(self) -> list[str]:
        with self._lock.read():
            return sorted(self._collections)

    def dim(self, name: str) -> int:
        with self._lock.read():
            return self._get(name).dim

    def count(self, name: str) -> int:
        with self._lock.read():
            return len(self._get(name).records)

    def insert(self, name: str, record_id: str, vector: Embedding, metadata: Mapping[str, str]) -> None:
        if "video_id" not in metadata:
            raise InvalidArgumentError("record metadata must include video_id")
        for key, value in metadata.items():
            if not isinstance(key, str) or not isinstance(value, str):
                raise InvalidArgumentError("metadata must be a flat string-to-string map")
        with self._lock.write():
            collection = self._get(name)
            if vector.dim != collection.dim:
                raise InvalidArgumentError(
                    f"vector dim {vector.dim} does not match collection {name!r} dim {collection.dim}"
                )
            if record_id in collection.records:
                raise ConflictError(f"record {record_id!r} already exists in {name!r}")
            collection.records[record_id] = (vector.values, dict(metadata))
            collection.invalidate()

    def search(
        self,
        name: str,
        query: Embedding,
        k: int,
        filter: Filter | None = None,
    ) -> list[SearchHit]:
        """Exact top-k by cosine, descending score, ties by ascending id.

        The filter restricts candidates (metadata equality) before ranking.
        """
        if k < 1:
            raise InvalidArgumentError(f"k must be >= 1, got {k}")
        with self._lock.read():
            collection = self._get(name)
            if query.dim != collection.dim:
                raise InvalidArgumentError(
                    f"query dim {query.dim} does not match collection {name!r} dim {collection.dim}"
                )
            ids, matrix = collection.matrix()
            if filter:
                keep = [
                    i for i, rid in enumerate(ids)
                    if _matches(collection.records[rid][1], filter)
                ]
                ids = [ids[i] for i in keep]
                matrix = matrix[keep]
            if not ids:
                return []
            scores = matrix @ query.values.astype(np.float64)
            top = _top_indices(ids, scores, k)
            return [
                SearchHit(id=ids[i], score=float(scores[i]), metadata=dict(collection.records[ids[i]][1]))
                for i in top
            ]

    def records(self, name: str, filter: Filter | None = None) -> list[tuple[str, dict[str, str]]]:
        """Snapshot of (id, metadata) pairs, optionally filtered, in insertion order."""
        with self._lock.read():
            collection = self._get(name)
            items = (
                (rid, dict(meta))
                for rid, (_, meta) in collection.records.items()
            )
            if filter:
                return [(rid, meta) for rid, meta in items if _matches(meta, filter)]
            return list(items)

    def get(self, name: str, record_id: str) -> tuple[Embedding, dict[str, str]]:
        with self._lock.read():
            collection = self._get(name)
            entry = collection.records.get(record_id)
            if entry is None:
                raise NotFoundError(f"record {record_id!r} not found in {name!r}")
            vector, metadata = entry
            return Embedding(values=vector, dim=collection.dim), dict(metadata)

    # -- persistence ---------------------------------------------------------

    def save(self, directory: "str | Path") -> None:
        """Write every collection to ``directory`` (write-temp-then-rename)."""
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        with self._lock.read():
            for name in sorted(self._collections):
                collection = self._collections[name]
                _write_atomic(root / f"{name}{VECTOR_SUFFIX}", _encode_vectors(collection))
                _write_atomic(root / f"{name}{SIDECAR_SUFFIX}", _encode_sidecar(collection))

    @classmethod
    def load(cls, directory: "str | Path") -> "VectorStore":
        """Rebuild a store from files written by :meth:`save`."""
        root = Path(directory)
        store = cls()
        for vector_path in sorted(root.glob(f"*{VECTOR_SUFFIX}")):
            name = vector_path.name[: -len(VECTOR_SUFFIX)]
            sidecar_path = root / f"{name}{SIDECAR_SUFFIX}"
            if not sidecar_path.exists():
                raise CorruptStoreError(f"missing metadata sidecar for collection {name!r}")
            collection = _decode_vectors(name, vector_path.read_bytes())
            _apply_sidecar(collection, sidecar_path.read_text(encoding="utf-8"))
            store._collections[name] = collection
        return store


def _top_indices(ids: list[str], scores: np.ndarray, k: int) -> list[int]:
    """Indices of the top-k hits under the (score desc, id asc) order."""
    n = len(ids)
    if k >= n:
        return sorted(range(n), key=lambda i: (-scores[i], ids[i]))
    # kth largest score bounds the candidate set; ties at the boundary are
    # kept and resolved by id so the result matches a full sort exactly.
    kth = np.partition(scores, n - k)[n - k]
    candidates = np.flatnonzero(scores >= kth).tolist()
    candidates.sort(key=lambda i: (-scores[i], ids[i]))
    return candidates[:k]


def _encode_vectors(collection: _Collection) -> bytes:
    parts = [
        MAGIC,
        struct.pack("<IIQ", FORMAT_VERSION, collection.dim, len(collection.records)),
    ]
    for record_id, (vector, _) in collection.records.items():
        id_bytes = record_id.encode("utf-8")
        if len(id_bytes) > 0xFFFF:
            raise InvalidArgumentError(f"record id too long to persist: {record_id!r}")
        parts.append(struct.pack("<H", len(id_bytes)))
        parts.append(id_bytes)
        parts.append(vector.astype("<f4").tobytes())
    payload = b"".join(parts)
    checksum = zlib.crc32(payload) & 0xFFFFFFFF
    return payload + struct.pack("<I", checksum)


def _decode_vectors(name: str, blob: bytes) -> _Collection:
    header_size = len(MAGIC) + struct.calcsize("<IIQ")
    if len(blob) < header_size + 4:
        raise CorruptStoreError(f"vector file for {name!r} is truncated")
    payload, checksum_bytes = blob[:-4], blob[-4:]
    (expected,) = struct.unpack("<I", checksum_bytes)
    if zlib.crc32(payload) & 0xFFFFFFFF != expected:
        raise CorruptStoreError(f"vector file for {name!r} failed its checksum")
    if payload[: len(MAGIC)] != MAGIC:
        raise CorruptStoreError(f"vector file for {name!r} has wrong magic bytes")
    version, dim, count = struct.unpack_from("<IIQ", payload, len(MAGIC))
    if version != FORMAT_VERSION:
        raise CorruptStoreError(f"vector file for {name!r} has unsupported version {version}")
    collection = _Collection(name, dim)
    offset = header_size
    for _ in range(count):
        if offset + 2 > len(payload):
            raise CorruptStoreError(f"vector file for {name!r} is truncated")
        (id_len,) = struct.unpack_from("<H", payload, offset)
        offset += 2
        end = offset + id_len + dim * 4
        if end > len(payload):
            raise CorruptStoreError(f"vector file for {name!r} is truncated")
        record_id = payload[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vector = np.frombuffer(payload, dtype="<f4", count=dim, offset=offset).copy()
        vector.setflags(write=False)
        offset += dim * 4
        if record_id in collection.records:
            raise CorruptStoreError(f"duplicate record id {record_id!r} in {name!r}")
        collection.records[record_id] = (vector, {})
    if offset != len(payload):
        raise CorruptStoreError(f"vector file for {name!r} has trailing bytes")
    return collection


def _encode_sidecar(collection: _Collection) -> bytes:
    lines = []
    for record_id, (_, metadata) in collection.records.items():
        entry = {"id": record_id, **metadata}
        lines.append(json.dumps(entry, ensure_ascii=False, sort_keys=True))
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


def _apply_sidecar(collection: _Collection, text: str) -> None:
    seen = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptStoreError(
                f"metadata sidecar for {collection.name!r} line {line_no} is not valid JSON"
            ) from exc
        record_id = entry.pop("id", None)
        if record_id not in collection.records:
            raise CorruptStoreError(
                f"metadata sidecar for {collection.name!r} references unknown id {record_id!r}"
            )
        vector, _ = collection.records[record_id]
        collection.records[record_id] = (vector, {k: str(v) for k, v in entry.items()})
        seen += 1
    if seen != len(collection.records):
        raise CorruptStoreError(
            f"metadata sidecar for {collection.name!r} covers {seen} of "
            f"{len(collection.records)} records"
        )


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)
