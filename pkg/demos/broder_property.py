"""Minhash collision rate tracks Jaccard similarity.

Run:  python demos/broder_property.py
"""

# %%
import numpy as np

from neardup import HashFamily, jaccard, minhash_vector, shingle

a = "The river flows north through the valley before it turns east toward the sea."
b = "The river flows north through the valley before it bends east toward the sea."
sa, sb = shingle(a, 12), shingle(b, 12)
j = jaccard(set(sa.tolist()), set(sb.tolist()))
print(f"exact Jaccard of the 12-gram sets: {j:.4f}")

# %%
# A family of 5000 multiply-shift functions; each one gives an independent
# coin that lands heads with probability J.
fam = HashFamily.from_seed(7, 5000)
agree = minhash_vector(sa, fam) == minhash_vector(sb, fam)
print(f"fraction of functions with equal minima: {agree.mean():.4f}")

# %%
# running estimate as functions are added
for n in (10, 100, 1000, 5000):
    print(f"{n:>5} functions -> {agree[:n].mean():.3f}")
