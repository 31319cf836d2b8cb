"""Union-find merging of collision groups, text reconstruction, exact-Jaccard
re-filtering and cluster statistics."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field, replace
from typing import IO, Iterable, Iterator

from .corpus import chunk_sentences, iter_documents, prepare
from .minhash import PipelineParams, jaccard, shingle

SentenceId = tuple[int, int]


class MissingSentenceError(LookupError):
    """A clustered sentence id is not present in the corpus being read."""


class UnionFind:
    """Disjoint sets over arbitrary hashable ids, interned to dense ints.

    ``index`` is the lookup table from id to node. A union points one head
    at the other; ``find`` compresses paths.
    """

    def __init__(self):
        self.index: dict = {}
        self.ids: list = []
        self.parent: list[int] = []

    def node(self, x) -> int:
        n = self.index.get(x)
        if n is None:
            n = len(self.parent)
            self.index[x] = n
            self.ids.append(x)
            self.parent.append(n)
        return n

    def find(self, n: int) -> int:
        parent = self.parent
        root = n
        while parent[root] != root:
            root = parent[root]
        while parent[n] != root:
            parent[n], n = root, parent[n]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
        return ra

    def groups(self) -> list[list]:
        """Members of each set, in order of first interning."""
        by_root: dict[int, list] = {}
        for n, x in enumerate(self.ids):
            by_root.setdefault(self.find(n), []).append(x)
        return list(by_root.values())


@dataclass(frozen=True)
class MergedCluster:
    cluster_id: int
    members: tuple[SentenceId, ...]
    texts: tuple[str, ...] | None = None
    titles: tuple[str, ...] | None = None

    @property
    def size(self) -> int:
        return len(self.members)

    def to_json(self) -> dict:
        members = []
        for i, (doc, idx) in enumerate(self.members):
            m = {"doc": doc, "idx": idx}
            if self.titles is not None:
                m["title"] = self.titles[i]
            if self.texts is not None:
                m["text"] = self.texts[i]
            members.append(m)
        return {"cluster_id": self.cluster_id, "members": members}

    @classmethod
    def from_json(cls, obj: dict) -> "MergedCluster":
        ms = obj["members"]
        members = tuple((int(m["doc"]), int(m["idx"])) for m in ms)
        texts = tuple(m["text"] for m in ms) if ms and all("text" in m for m in ms) else None
        titles = tuple(m["title"] for m in ms) if ms and all("title" in m for m in ms) else None
        return cls(int(obj["cluster_id"]), members, texts, titles)


def merge_clusters(raw: Iterable) -> list[MergedCluster]:
    """Connected components of the co-membership graph of ``raw`` clusters.

    Accepts anything with a ``members`` sequence of sentence ids, so merged
    output can be fed back in. Members are sorted; clusters are ordered by
    their smallest member and numbered densely from 0.
    """
    uf = UnionFind()
    for cluster in raw:
        nodes = [uf.node(m) for m in cluster.members]
        for n in nodes[1:]:
            uf.union(nodes[0], n)
    comps = sorted(sorted(g) for g in uf.groups() if len(g) > 1)
    return [MergedCluster(i, tuple(c)) for i, c in enumerate(comps)]


def reconstruct(clusters: list[MergedCluster], source, params: PipelineParams | None = None,
                *, strip: bool = True) -> list[MergedCluster]:
    """Attach sentence texts and document titles with one pass over ``source``.

    Only the clustered sentences are held in memory. The corpus must be the
    one the clusters were computed from.
    """
    if not clusters:
        return []
    params = params or PipelineParams()
    wanted: dict[int, set[int]] = defaultdict(set)
    for c in clusters:
        for doc, idx in c.members:
            wanted[doc].add(idx)

    texts: dict[SentenceId, str] = {}
    titles: dict[int, str] = {}
    for doc in iter_documents(source):
        idxs = wanted.get(doc.doc_id)
        if not idxs:
            continue
        titles[doc.doc_id] = doc.title
        for rec in chunk_sentences(prepare(doc) if strip else doc, params):
            if rec.sentence_index in idxs:
                texts[rec.sentence_id] = rec.text

    out = []
    for c in clusters:
        for sid in c.members:
            if sid not in texts:
                raise MissingSentenceError(
                    f"sentence {sid[0]}:{sid[1]} of cluster {c.cluster_id} not found in corpus"
                )
        out.append(replace(
            c,
            texts=tuple(texts[sid] for sid in c.members),
            titles=tuple(titles[sid[0]] for sid in c.members),
        ))
    return out


def second_pass_filter(cluster: MergedCluster, threshold: float = 0.9,
                       shingle_len: int = 12) -> list[MergedCluster]:
    """Split ``cluster`` into the components of its exact-Jaccard threshold graph.

    Edges join members whose shingle sets have Jaccard >= ``threshold``;
    components with fewer than two members are dropped. Each returned
    cluster keeps the parent's ``cluster_id``.
    """
    if cluster.texts is None:
        raise ValueError("second_pass_filter needs cluster texts; run reconstruct first")
    if threshold > 1.0:
        return []
    # identical texts always connect (J = 1), so compare distinct texts only
    distinct = sorted(set(cluster.texts))
    sets = [shingle(t, shingle_len) if len(t) >= shingle_len else None for t in distinct]
    uf = UnionFind()
    for i in range(len(distinct)):
        uf.node(i)
        for j in range(i):
            if sets[i] is not None and sets[j] is not None and jaccard(sets[i], sets[j]) >= threshold:
                uf.union(uf.node(j), uf.node(i))
    comp_of_text = {t: uf.find(i) for i, t in enumerate(distinct)}

    parts: dict = defaultdict(list)
    for k, t in enumerate(cluster.texts):
        parts[comp_of_text[t]].append(k)
    out = []
    for positions in parts.values():
        if len(positions) < 2:
            continue
        out.append(MergedCluster(
            cluster.cluster_id,
            tuple(cluster.members[k] for k in positions),
            tuple(cluster.texts[k] for k in positions),
            None if cluster.titles is None else tuple(cluster.titles[k] for k in positions),
        ))
    out.sort(key=lambda c: c.members)
    return out


def apply_second_pass(clusters: Iterable[MergedCluster], threshold: float = 0.9,
                      shingle_len: int = 12) -> list[MergedCluster]:
    """``second_pass_filter`` over every cluster, renumbered densely."""
    kept = [part for c in clusters for part in second_pass_filter(c, threshold, shingle_len)]
    kept.sort(key=lambda c: c.members)
    return [replace(c, cluster_id=i) for i, c in enumerate(kept)]


# -- statistics -----------------------------------------------------------------


def size_bucket(size: int) -> str:
    """Exact label for sizes up to 16, then ``"17-32"``, ``"33-64"``, ..."""
    if size <= 16:
        return str(size)
    hi = 1 << (size - 1).bit_length()
    return f"{hi // 2 + 1}-{hi}"


def _bucket_order(label: str) -> int:
    return int(label.split("-")[0])


@dataclass
class ClusterStats:
    cluster_count: int = 0
    sentence_pair_count: int = 0
    distinct_article_count: int = 0
    distinct_sentence_count: int = 0
    min_size: int = 0
    max_size: int = 0
    fraction_small_clusters: float = 0.0
    fraction_pairs_in_large_clusters: float = 0.0
    size_histogram: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


SMALL_CLUSTER_MAX = 10


def compute_stats(clusters: Iterable[MergedCluster]) -> ClusterStats:
    """Counts, size histogram and small/large cluster fractions.

    ``sentence_pair_count`` counts (article, sentence) members over all
    clusters. ``distinct_sentence_count`` counts distinct texts when texts
    are attached and distinct sentence ids otherwise.
    """
    clusters = list(clusters)
    if not clusters:
        return ClusterStats()
    sizes = [c.size for c in clusters]
    pairs = sum(sizes)
    articles = {doc for c in clusters for doc, _ in c.members}
    if all(c.texts is not None for c in clusters):
        distinct = len({t for c in clusters for t in c.texts})
    else:
        distinct = len({m for c in clusters for m in c.members})
    hist: dict[str, int] = defaultdict(int)
    for s in sizes:
        hist[size_bucket(s)] += 1
    return ClusterStats(
        cluster_count=len(clusters),
        sentence_pair_count=pairs,
        distinct_article_count=len(articles),
        distinct_sentence_count=distinct,
        min_size=min(sizes),
        max_size=max(sizes),
        fraction_small_clusters=sum(s <= SMALL_CLUSTER_MAX for s in sizes) / len(sizes),
        fraction_pairs_in_large_clusters=sum(s for s in sizes if s > SMALL_CLUSTER_MAX) / pairs,
        size_histogram={k: hist[k] for k in sorted(hist, key=_bucket_order)},
    )


# -- file formats ---------------------------------------------------------------


def write_clusters_jsonl(clusters: Iterable[MergedCluster], out: IO[str]) -> int:
    n = 0
    for c in clusters:
        out.write(json.dumps(c.to_json(), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_clusters_jsonl(fh: IO[str]) -> Iterator[MergedCluster]:
    for lineno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            yield MergedCluster.from_json(json.loads(line))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"clusters line {lineno}: {exc}") from None


def write_histogram_tsv(stats: ClusterStats, out: IO[str]):
    for bucket, count in stats.size_histogram.items():
        out.write(f"{bucket}\t{count}\n")
