"""Regenerate golden_base_hash.tsv.

Standalone on purpose: re-implements the documented polynomial string hash
without importing the package.
"""
import random
from functools import reduce

OFFSET = 14695981039346656037
PRIME = 1099511628211


def poly(s):
    return reduce(lambda h, b: (h * PRIME + b) % 2**64, s.encode("utf-8"), OFFSET)


rng = random.Random(20130701)
alphabet = "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJ0123456789.,%éüçñ—中文𝄞"
with open("golden_base_hash.tsv", "w", encoding="utf-8") as out:
    for _ in range(100):
        s = "".join(rng.choice(alphabet) for _ in range(12))
        out.write(f"{s}\t{poly(s)}\n")
