"""End to end on a synthetic corpus with known near-duplicate pairs.

Run:  python demos/planted_duplicates.py
"""

# %%
from neardup import (
    PipelineParams,
    compute_stats,
    make_selections,
    merge_clusters,
    reconstruct,
    run_pipeline,
    selection_recall,
)
from neardup.synth import planted_corpus

pc = planted_corpus(n_sentences=10_000, n_pairs=200, n_decoys=200, seed=0)
print(len(pc.documents), "documents,", pc.sentence_count, "sentences")
print("planted pair Jaccard range:", min(j for *_, j in pc.pairs), max(j for *_, j in pc.pairs))

# %%
params = PipelineParams()
clusters = merge_clusters(run_pipeline(pc.documents, params))
where = {m: c.cluster_id for c in clusters for m in c.members}


def together(a, b):
    return a in where and where.get(a) == where.get(b)


found = sum(together(a, b) for a, b, _ in pc.pairs)
decoys = sum(together(a, b) for a, b, _ in pc.decoys)
sel = make_selections(params)
print(f"pairs recovered: {found}/200, exact model expects {sum(selection_recall(j, sel) for *_, j in pc.pairs):.1f}")
print(f"decoys co-clustered: {decoys}/200")

# %%
clusters = reconstruct(clusters, pc.documents, params)
print(compute_stats(clusters))
c = clusters[0]
for sid, text in zip(c.members, c.texts):
    print(sid, text[:70], "...")
