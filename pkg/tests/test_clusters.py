import io
import json
import random
from collections import Counter, deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neardup.clusters import (
    ClusterStats,
    MergedCluster,
    MissingSentenceError,
    UnionFind,
    apply_second_pass,
    compute_stats,
    merge_clusters,
    read_clusters_jsonl,
    reconstruct,
    second_pass_filter,
    size_bucket,
    write_clusters_jsonl,
    write_histogram_tsv,
)
from neardup.corpus import Document, iter_sentences
from neardup.minhash import PipelineParams, jaccard, shingle
from neardup.pipeline import RawCluster, run_pipeline
from neardup.synth import planted_corpus


def raw(*groups):
    return [RawCluster(b"", tuple(g)) for g in groups]


def bfs_components(groups):
    adj = {}
    for g in groups:
        for a in g:
            adj.setdefault(a, set())
            for b in g:
                if a != b:
                    adj[a].add(b)
    seen, comps = set(), []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, queue = [], deque([start])
        seen.add(start)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(comp) > 1:
            comps.append(sorted(comp))
    return sorted(comps)


A, B, C, D = (1, 0), (2, 0), (3, 0), (4, 0)


# -- union find ----------------------------------------------------------------


def test_union_find_basics():
    uf = UnionFind()
    a, b, c = uf.node("a"), uf.node("b"), uf.node("c")
    assert uf.node("a") == a
    uf.union(a, b)
    assert uf.find(a) == uf.find(b) != uf.find(c)
    assert sorted(map(sorted, uf.groups())) == [["a", "b"], ["c"]]


def test_union_find_long_chain_no_recursion_limit():
    uf = UnionFind()
    nodes = [uf.node(i) for i in range(50_000)]
    for x, y in zip(nodes[1:], nodes):
        uf.union(x, y)
    assert len({uf.find(n) for n in nodes}) == 1


def test_merge_disjoint_and_overlapping():
    assert [c.members for c in merge_clusters(raw([A, B], [C, D]))] == [(A, B), (C, D)]
    assert [c.members for c in merge_clusters(raw([A, B], [B, C]))] == [(A, B, C)]


def test_merge_numbering_and_disjointness():
    out = merge_clusters(raw([D, C], [B, A], [C, (9, 9)]))
    assert [c.cluster_id for c in out] == [0, 1]
    assert out[0].members == (A, B)
    members = [m for c in out for m in c.members]
    assert len(members) == len(set(members))


def test_merge_fifty_random_against_bfs():
    rng = random.Random(50)
    nodes = [(i, 0) for i in range(30)]
    groups = [rng.sample(nodes, rng.randint(2, 4)) for _ in range(50)]
    assert [list(c.members) for c in merge_clusters(raw(*groups))] == bfs_components(groups)


@given(st.lists(st.lists(st.tuples(st.integers(0, 40), st.integers(0, 2)), min_size=2, max_size=6),
                max_size=30))
@settings(max_examples=200)
def test_merge_matches_bfs_property(groups):
    groups = [list(dict.fromkeys(g)) for g in groups]
    groups = [g for g in groups if len(g) > 1]
    assert [list(c.members) for c in merge_clusters(raw(*groups))] == bfs_components(groups)


def test_merge_is_idempotent():
    rng = random.Random(3)
    nodes = [(i, 0) for i in range(100)]
    groups = raw(*(rng.sample(nodes, 2) for _ in range(60)))
    once = merge_clusters(groups)
    assert merge_clusters(once) == once


# -- reconstruct -----------------------------------------------------------------


S1 = "The first fixture sentence is long enough to pass the shingle length filter easily."
S2 = "The second fixture sentence is also long enough to pass the shingle length filter."


def fixture_docs():
    return [Document(10, "Ten", f"Short. {S1}"), Document(20, "Twenty", f"{S2} Tiny.")]


def test_reconstruct_fixture_texts():
    p = PipelineParams(min_shingles=20)
    out = reconstruct([MergedCluster(0, ((10, 1), (20, 0)))], fixture_docs(), p)
    assert out[0].texts == (S1, S2)
    assert out[0].titles == ("Ten", "Twenty")


def test_reconstruct_empty_reads_nothing():
    class Exploding:
        def documents(self):
            raise AssertionError("corpus should not be read")

    assert reconstruct([], Exploding()) == []


def test_reconstruct_missing_id():
    p = PipelineParams(min_shingles=20)
    with pytest.raises(MissingSentenceError, match="10:5"):
        reconstruct([MergedCluster(0, ((10, 5), (20, 0)))], fixture_docs(), p)


@pytest.fixture(scope="module")
def planted_run():
    pc = planted_corpus(n_sentences=2000, n_pairs=150, n_decoys=0, seed=11)
    merged = merge_clusters(run_pipeline(pc.documents))
    return pc, reconstruct(merged, pc.documents)


def test_reconstruct_round_trip(planted_run):
    pc, clusters = planted_run
    assert len(clusters) >= 100
    by_id = {r.sentence_id: r.text for r in iter_sentences(pc.documents)}
    for c in clusters:
        for sid, text in zip(c.members, c.texts):
            assert by_id[sid] == text


# -- second pass ----------------------------------------------------------------


def _cluster(texts):
    return MergedCluster(3, tuple((i, 0) for i in range(len(texts))), tuple(texts))


def test_second_pass_identical_unchanged():
    c = _cluster([S1, S1, S1])
    for t in (0.0, 0.5, 1.0):
        assert second_pass_filter(c, t) == [c]


def test_second_pass_disjoint_removed():
    assert second_pass_filter(_cluster(["a" * 20, "b" * 20]), 0.9) == []


def test_second_pass_requires_texts():
    with pytest.raises(ValueError):
        second_pass_filter(MergedCluster(0, (A, B)), 0.9)


def _mixed_texts():
    base = S1
    return [
        base,
        base.replace("first", "firsT"),
        base.replace("easily", "quickly"),
        S2,
        S2.replace("also", "alsa"),
        "Something entirely different that shares nothing with the other sentences here.",
    ]


def test_second_pass_against_all_pairs_bfs():
    texts = _mixed_texts()
    c = _cluster(texts)
    sets = [shingle(t, 12) for t in texts]
    for threshold in (0.3, 0.6, 0.8, 0.9):
        edges = [[c.members[i], c.members[j]] for i in range(6) for j in range(i + 1, 6)
                 if jaccard(sets[i], sets[j]) >= threshold]
        oracle = bfs_components(edges)
        got = [list(p.members) for p in second_pass_filter(c, threshold)]
        assert got == oracle
        assert all(p.cluster_id == 3 for p in second_pass_filter(c, threshold))


def _pair_count(clusters):
    return sum(c.size for c in clusters)


def test_second_pass_monotone_in_threshold():
    c = _cluster(_mixed_texts())
    counts = [_pair_count(second_pass_filter(c, t)) for t in (0.0, 0.3, 0.5, 0.7, 0.9, 1.0)]
    assert counts == sorted(counts, reverse=True)


def test_apply_second_pass_renumbers(planted_run):
    _, clusters = planted_run
    kept = apply_second_pass(clusters, 0.85)
    assert [c.cluster_id for c in kept] == list(range(len(kept)))


# -- stats --------------------------------------------------------------------------


def test_stats_empty():
    s = compute_stats([])
    assert s == ClusterStats()
    assert s.size_histogram == {}


def test_stats_small_example():
    cs = [MergedCluster(0, (A, B)), MergedCluster(1, (C, D)), MergedCluster(2, ((5, 0), (5, 1), (6, 0)))]
    s = compute_stats(cs)
    assert s.cluster_count == 3
    assert s.sentence_pair_count == 7
    assert s.distinct_article_count == 6
    assert s.size_histogram == {"2": 2, "3": 1}
    assert s.fraction_small_clusters == 1.0
    assert s.fraction_pairs_in_large_clusters == 0.0


@pytest.mark.parametrize("size,bucket", [(2, "2"), (16, "16"), (17, "17-32"), (32, "17-32"),
                                         (33, "33-64"), (40_000, "32769-65536")])
def test_size_bucket(size, bucket):
    assert size_bucket(size) == bucket


def test_stats_histogram_sums_to_cluster_count():
    rng = random.Random(4)
    cs = [MergedCluster(i, tuple((i, k) for k in range(rng.choice([2, 3, 5, 11, 40, 300]))))
          for i in range(200)]
    s = compute_stats(cs)
    assert sum(s.size_histogram.values()) == s.cluster_count == 200
    assert s.sentence_pair_count == sum(c.size for c in cs)
    large = sum(c.size for c in cs if c.size > 10)
    assert s.fraction_pairs_in_large_clusters == pytest.approx(large / s.sentence_pair_count)


def test_stats_recount_from_file(planted_run):
    _, clusters = planted_run
    buf = io.StringIO()
    write_clusters_jsonl(clusters, buf)
    stats = compute_stats(clusters)

    # independent recount straight from the JSON lines
    sizes, docs, texts = [], set(), set()
    for line in buf.getvalue().splitlines():
        obj = json.loads(line)
        sizes.append(len(obj["members"]))
        docs.update(m["doc"] for m in obj["members"])
        texts.update(m["text"] for m in obj["members"])
    assert stats.cluster_count == len(sizes)
    assert stats.sentence_pair_count == sum(sizes)
    assert stats.distinct_article_count == len(docs)
    assert stats.distinct_sentence_count == len(texts)
    assert stats.size_histogram == {str(k): v for k, v in sorted(Counter(sizes).items())}


def test_jsonl_roundtrip(planted_run):
    _, clusters = planted_run
    buf = io.StringIO()
    write_clusters_jsonl(clusters, buf)
    buf.seek(0)
    assert list(read_clusters_jsonl(buf)) == clusters


def test_histogram_tsv():
    s = compute_stats([MergedCluster(0, (A, B)), MergedCluster(1, tuple((9, k) for k in range(20)))])
    out = io.StringIO()
    write_histogram_tsv(s, out)
    assert out.getvalue() == "2\t1\n17-32\t1\n"
