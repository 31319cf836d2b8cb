"""Labelling clusters with the six-type heuristic.

Run:  python demos/taxonomy_tour.py
"""

# %%
from neardup import MergedCluster, classify, format_table, tabulate

clusters = {
    "templates": [
        "Of the agricultural land 40.4% is used for growing crops and 26.6% is pastures.",
        "Of the agricultural land 26.1% is used for growing crops and 30.2% is pastures.",
        "Of the agricultural land 37.8% is used for growing crops and 35.5% is pastures.",
    ],
    "drift": [
        "The town had 7 million visitors before the railway closed in 1913 after the war.",
        "The town had 4.5 million visitors before the railway closed in 1913 after the war.",
    ],
    "copyedit": [
        "It may only emerge from its burrow when conditions are right and usually at night.",
        "It may only emerge from its burrow when conditions are right and only at night.",
    ],
}

labels = []
for name, texts in clusters.items():
    c = MergedCluster(0, tuple((i, 0) for i in range(len(texts))), tuple(texts))
    lab = classify(c)
    labels.append(lab)
    print(f"{name:<10} -> {lab.label.value:<13} {lab.evidence}")

# %%
print()
print(format_table(tabulate(labels)))
