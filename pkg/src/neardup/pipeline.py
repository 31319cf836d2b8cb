"""Map and group stages: emit (signature, sentence id) pairs, collect collisions.

Keys are ``draw_index (u16, big-endian) || K values (u64, big-endian)`` so
that byte order equals (draw, values) order. Emissions travel through the
grouper as fixed-width records ``key || doc_id (u64) || sentence_index (u32)``;
sorting the raw bytes therefore sorts by key and then by sentence id.
"""

from __future__ import annotations

import heapq
import logging
import os
import shutil
import struct
import tempfile
from collections import deque
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from itertools import groupby, islice
from typing import Iterable, Iterator, NamedTuple

from .corpus import Document, chunk_sentences, iter_documents, prepare
from .minhash import (
    SENTENCE_ID_SIZE,
    HashFamily,
    PipelineParams,
    Signature,
    SignatureSelections,
    make_selections,
    minhash_vector,
    shingle,
    signatures,
)

log = logging.getLogger(__name__)

SentenceId = tuple[int, int]

_ID = struct.Struct(">QI")


class GroupingError(OSError):
    """Spill directory could not be created, written or read."""


class Emission(NamedTuple):
    key: bytes
    sentence_id: SentenceId


@dataclass(frozen=True)
class RawCluster:
    key: bytes
    members: tuple[SentenceId, ...]

    def to_line(self) -> str:
        ids = ",".join(f"{d}:{i}" for d, i in self.members)
        return f"{self.key.hex()}\t{ids}"

    @classmethod
    def from_line(cls, line: str) -> "RawCluster":
        key, _, ids = line.rstrip("\n").partition("\t")
        members = tuple(
            (int(d), int(i)) for d, i in (tok.split(":") for tok in ids.split(",") if tok)
        )
        return cls(bytes.fromhex(key), members)


def encode_key(sig: Signature) -> bytes:
    return struct.pack(f">H{len(sig.values)}Q", sig.draw_index, *sig.values)


def decode_key(key: bytes) -> Signature:
    k = (len(key) - 2) // 8
    if len(key) != 2 + 8 * k:
        raise ValueError(f"key of {len(key)} bytes is not a valid signature encoding")
    draw, *values = struct.unpack(f">H{k}Q", key)
    return Signature(draw, tuple(values))


def key_size(sig_len: int) -> int:
    return 2 + 8 * sig_len


# -- map -------------------------------------------------------------------------


def sentence_signatures(text: str, params: PipelineParams, family: HashFamily,
                        selections: SignatureSelections) -> list[Signature]:
    return signatures(minhash_vector(shingle(text, params.shingle_len), family), selections)


def map_document(doc: Document, params: PipelineParams, family: HashFamily,
                 selections: SignatureSelections, *, strip: bool = True) -> list[Emission]:
    """``num_sigs`` emissions for every sentence of ``doc`` that survives chunking."""
    if strip:
        doc = prepare(doc)
    out = []
    for rec in chunk_sentences(doc, params):
        for sig in sentence_signatures(rec.text, params, family, selections):
            out.append(Emission(encode_key(sig), rec.sentence_id))
    return out


_worker_state: tuple | None = None


def _init_worker(params: PipelineParams, strip: bool):
    global _worker_state
    _worker_state = (params, HashFamily.from_params(params), make_selections(params), strip)


def _map_batch(docs: list[Document]) -> tuple[int, bytes]:
    params, family, selections, strip = _worker_state
    n = 0
    chunks = []
    for doc in docs:
        for e in map_document(doc, params, family, selections, strip=strip):
            chunks.append(e.key + _ID.pack(*e.sentence_id))
            n += 1
    return n, b"".join(chunks)


def _batched(it: Iterable, size: int) -> Iterator[list]:
    it = iter(it)
    while batch := list(islice(it, size)):
        yield batch


def _bounded_map(pool: Executor, fn, batches: Iterable, in_flight: int) -> Iterator:
    """Like ``pool.map`` but with at most ``in_flight`` pending tasks, in order."""
    pending: deque = deque()
    for batch in batches:
        pending.append(pool.submit(fn, batch))
        if len(pending) >= in_flight:
            yield pending.popleft().result()
    while pending:
        yield pending.popleft().result()


# -- group -----------------------------------------------------------------------


def _group_sorted(records: Iterable[bytes], key_len: int) -> Iterator[RawCluster]:
    for key, grp in groupby(records, key=lambda r: r[:key_len]):
        ids = []
        last = None
        for rec in grp:
            sid = rec[key_len:]
            if sid != last:
                ids.append(_ID.unpack(sid))
                last = sid
        if len(ids) > 1:
            yield RawCluster(key, tuple(ids))


def _read_run(path: str, rec_len: int) -> Iterator[bytes]:
    try:
        with open(path, "rb") as fh:
            while rec := fh.read(rec_len):
                yield rec
    except OSError as exc:
        raise GroupingError(f"cannot read spill file {path}: {exc.strerror}") from None


def _reduce_partition(run_paths: list[str], rec_len: int, key_len: int, out_path: str) -> str:
    """Merge a partition's sorted runs and write its clusters as text lines."""
    merged = heapq.merge(*(_read_run(p, rec_len) for p in run_paths))
    try:
        with open(out_path, "w", encoding="ascii") as out:
            for cluster in _group_sorted(merged, key_len):
                out.write(cluster.to_line() + "\n")
    except OSError as exc:
        raise GroupingError(f"cannot write spill file {out_path}: {exc.strerror}") from None
    return out_path


def _read_clusters(path: str) -> Iterator[RawCluster]:
    with open(path, encoding="ascii") as fh:
        for line in fh:
            yield RawCluster.from_line(line)


class ExternalGrouper:
    """Sort-based grouping of fixed-width emission records with spill to disk.

    Records are routed to ``partitions`` buckets by draw index. When the
    buffered bytes exceed ``mem_bytes`` every bucket is sorted and written as
    a run. ``clusters()`` reduces each partition (in a process pool once runs
    exist on disk) and merges the partitions' outputs by key.
    """

    # per-record overhead of a bytes object in a list
    _OVERHEAD = 41

    def __init__(self, sig_len: int, *, mem_bytes: int = 256 << 20, tmp_dir: str | None = None,
                 partitions: int = 1, workers: int = 1):
        self.key_len = key_size(sig_len)
        self.rec_len = self.key_len + SENTENCE_ID_SIZE
        self.mem_bytes = max(mem_bytes, 1)
        self.tmp_dir = tmp_dir
        self.partitions = max(1, partitions)
        self.workers = max(1, workers)
        self._buffers: list[list[bytes]] = [[] for _ in range(self.partitions)]
        self._buffered = 0
        self._runs: list[list[str]] = [[] for _ in range(self.partitions)]
        self._spill_dir: str | None = None
        self.records = 0

    def add(self, emission: Emission):
        self.add_record(emission.key + _ID.pack(*emission.sentence_id))

    def add_record(self, rec: bytes):
        if len(rec) != self.rec_len:
            raise ValueError(f"record of {len(rec)} bytes, expected {self.rec_len}")
        self._buffers[int.from_bytes(rec[:2], "big") % self.partitions].append(rec)
        self.records += 1
        self._buffered += self.rec_len + self._OVERHEAD
        if self._buffered >= self.mem_bytes:
            self._spill()

    def add_packed(self, blob: bytes):
        for off in range(0, len(blob), self.rec_len):
            self.add_record(blob[off : off + self.rec_len])

    @property
    def spilled(self) -> bool:
        return self._spill_dir is not None

    def _spill_path(self, name: str) -> str:
        if self._spill_dir is None:
            try:
                self._spill_dir = tempfile.mkdtemp(prefix="neardup-", dir=self.tmp_dir)
            except OSError as exc:
                raise GroupingError(
                    f"cannot create spill directory in {self.tmp_dir or tempfile.gettempdir()}: "
                    f"{exc.strerror}"
                ) from None
        return os.path.join(self._spill_dir, name)

    def _spill(self):
        for p, buf in enumerate(self._buffers):
            if not buf:
                continue
            buf.sort()
            path = self._spill_path(f"p{p:04d}-r{len(self._runs[p]):06d}.bin")
            try:
                with open(path, "wb") as fh:
                    fh.write(b"".join(buf))
            except OSError as exc:
                raise GroupingError(f"cannot write spill file {path}: {exc.strerror}") from None
            self._runs[p].append(path)
            self._buffers[p] = []
        self._buffered = 0
        log.debug("spilled runs to %s", self._spill_dir)

    def clusters(self) -> Iterator[RawCluster]:
        """Collision groups of size >= 2, ordered by key ascending."""
        try:
            if not self.spilled:
                streams = []
                for buf in self._buffers:
                    buf.sort()
                    streams.append(_group_sorted(buf, self.key_len))
                yield from heapq.merge(*streams, key=lambda c: c.key)
                return

            self._spill()
            outs = [self._spill_path(f"p{p:04d}-out.tsv") for p in range(self.partitions)]
            jobs = [(runs, self.rec_len, self.key_len, out) for runs, out in zip(self._runs, outs)]
            if self.workers > 1 and self.partitions > 1:
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    list(pool.map(_reduce_partition, *zip(*jobs)))
            else:
                for job in jobs:
                    _reduce_partition(*job)
            yield from heapq.merge(*(_read_clusters(o) for o in outs), key=lambda c: c.key)
        finally:
            self.close()

    def close(self):
        self._buffers = [[] for _ in range(self.partitions)]
        if self._spill_dir is not None:
            shutil.rmtree(self._spill_dir, ignore_errors=True)
            self._spill_dir = None
            self._runs = [[] for _ in range(self.partitions)]


def group_by_signature(emissions: Iterable[Emission], sig_len: int | None = None, *,
                       workers: int = 1, sort_mem_mb: float = 256,
                       tmp_dir: str | None = None) -> Iterator[RawCluster]:
    """Group emissions by key, keeping groups with at least two distinct ids.

    ``sig_len`` is taken from the first key when not given.
    """
    it = iter(emissions)
    first = next(it, None)
    if first is None:
        return iter(())
    if sig_len is None:
        sig_len = (len(first.key) - 2) // 8
    grouper = ExternalGrouper(sig_len, mem_bytes=int(sort_mem_mb * (1 << 20)), tmp_dir=tmp_dir,
                              partitions=workers, workers=workers)
    try:
        grouper.add(first)
        for e in it:
            grouper.add(e)
    except BaseException:
        grouper.close()
        raise
    return grouper.clusters()


# -- orchestration ---------------------------------------------------------------


@dataclass
class PipelineCounters:
    documents: int = 0
    sentences: int = 0
    emissions: int = 0
    spilled: bool = False


def run_pipeline(source, params: PipelineParams | None = None, *, workers: int = 1,
                 sort_mem_mb: float = 256, tmp_dir: str | None = None, strip: bool = True,
                 batch_size: int = 64, counters: PipelineCounters | None = None,
                 ) -> Iterator[RawCluster]:
    """Raw collision clusters for a corpus.

    ``source`` is a ``CorpusSource``, a path, or an iterable of documents.
    Output does not depend on ``workers`` or on how documents are batched.
    """
    params = params or PipelineParams()
    counters = counters if counters is not None else PipelineCounters()
    grouper = ExternalGrouper(params.sig_len, mem_bytes=int(sort_mem_mb * (1 << 20)),
                              tmp_dir=tmp_dir, partitions=workers, workers=workers)

    def docs():
        for d in iter_documents(source):
            counters.documents += 1
            yield d

    try:
        batches = _batched(docs(), batch_size)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                     initargs=(params, strip)) as pool:
                for n, blob in _bounded_map(pool, _map_batch, batches, in_flight=4 * workers):
                    counters.emissions += n
                    grouper.add_packed(blob)
        else:
            _init_worker(params, strip)
            for batch in batches:
                n, blob = _map_batch(batch)
                counters.emissions += n
                grouper.add_packed(blob)
    except BaseException:
        grouper.close()
        raise
    counters.sentences = counters.emissions // params.num_sigs
    counters.spilled = grouper.spilled
    log.info("mapped %d documents, %d emissions", counters.documents, counters.emissions)
    return grouper.clusters()
