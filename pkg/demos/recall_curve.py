"""How likely is a pair at similarity s to share at least one signature?

Run:  python demos/recall_curve.py
"""

# %%
from neardup import PipelineParams, expected_recall, make_selections, selection_recall

# With K values per signature and M signatures per sentence, the textbook
# banding estimate is 1 - (1 - s^K)^M.
for k in (5, 10, 15, 20):
    row = "  ".join(f"{expected_recall(s, k, 10):.3f}" for s in (0.5, 0.7, 0.8, 0.9, 0.95))
    print(f"K={k:<3} {row}")

# %%
# The default run draws its 10 signatures out of only 20 minhash values, so
# the draws overlap heavily and are not independent. The exact match
# probability for the actual draws is noticeably lower.
params = PipelineParams()
sel = make_selections(params)
shared = [len(set(a) & set(b)) for i, a in enumerate(sel.draws) for b in sel.draws[i + 1:]]
print("mean coordinates shared between two draws:", sum(shared) / len(shared))
for s in (0.8, 0.85, 0.9, 0.95):
    print(f"s={s}: formula {expected_recall(s, 10, 10):.4f}   exact for these draws {selection_recall(s, sel):.4f}")
