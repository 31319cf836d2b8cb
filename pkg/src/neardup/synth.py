"""Synthetic corpora with planted near-duplicate pairs, for recall experiments."""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .corpus import Document
from .minhash import jaccard, shingle

SentenceId = tuple[int, int]


@dataclass
class PlantedCorpus:
    documents: list[Document]
    # (id_a, id_b, exact Jaccard of their shingle sets)
    pairs: list[tuple[SentenceId, SentenceId, float]]
    decoys: list[tuple[SentenceId, SentenceId, float]]
    sentence_count: int


def make_vocabulary(rng: random.Random, size: int = 4000) -> list[str]:
    words = set()
    while len(words) < size:
        words.add("".join(rng.choices(string.ascii_lowercase, k=rng.randint(3, 10))))
    return sorted(words)


def random_sentence(rng: random.Random, vocab: list[str], min_len: int = 230,
                    max_len: int = 270) -> str:
    """A capitalised run of lowercase words ending in a period, no other punctuation."""
    target = rng.randint(min_len, max_len)
    words = [rng.choice(vocab)]
    while sum(map(len, words)) + len(words) < target:
        words.append(rng.choice(vocab))
    text = " ".join(words)[: target - 1].rstrip()
    return text[0].upper() + text[1:] + "."


def perturb(rng: random.Random, text: str) -> str:
    """Replace one lowercase letter away from the ends with a different one."""
    while True:
        i = rng.randrange(15, len(text) - 15)
        if text[i] in string.ascii_lowercase:
            c = rng.choice([ch for ch in string.ascii_lowercase if ch != text[i]])
            return text[:i] + c + text[i + 1 :]


def planted_corpus(
    n_sentences: int = 10_000,
    n_pairs: int = 200,
    n_decoys: int = 200,
    *,
    seed: int = 0,
    shingle_len: int = 12,
    pair_range: tuple[float, float] = (0.88, 0.92),
    decoy_max: float = 0.3,
    sentences_per_doc: int = 10,
) -> PlantedCorpus:
    """Corpus of unrelated random sentences plus planted pairs and decoys.

    Planted pairs differ by one character and have exact shingle Jaccard in
    ``pair_range``; decoys share a leading fragment and have Jaccard below
    ``decoy_max``. Every sentence is used once and sentences are shuffled
    across documents, so pair members usually land in different documents.
    """
    rng = random.Random(seed)
    vocab = make_vocabulary(rng)
    tagged: list[tuple[str, tuple[str, int] | None]] = []

    for k in range(n_pairs):
        while True:
            a = random_sentence(rng, vocab)
            b = perturb(rng, a)
            j = jaccard(shingle(a, shingle_len), shingle(b, shingle_len))
            if pair_range[0] <= j <= pair_range[1]:
                break
        tagged += [(a, ("pair", k)), (b, ("pair", k))]

    for k in range(n_decoys):
        while True:
            a = random_sentence(rng, vocab)
            cut = rng.randint(len(a) // 5, len(a) // 4)
            b = a[:cut].rstrip() + " " + random_sentence(rng, vocab, len(a) - cut, len(a) - cut).lower()
            j = jaccard(shingle(a, shingle_len), shingle(b, shingle_len))
            if 0.0 < j < decoy_max:
                break
        tagged += [(a, ("decoy", k)), (b, ("decoy", k))]

    while len(tagged) < n_sentences:
        tagged.append((random_sentence(rng, vocab), None))
    rng.shuffle(tagged)

    docs = []
    where: dict[tuple[str, int], list[tuple[SentenceId, str]]] = {}
    for d in range(0, len(tagged), sentences_per_doc):
        chunk = tagged[d : d + sentences_per_doc]
        doc_id = d // sentences_per_doc
        for idx, (text, tag) in enumerate(chunk):
            if tag is not None:
                where.setdefault(tag, []).append(((doc_id, idx), text))
        docs.append(Document(doc_id, f"doc{doc_id}", " ".join(t for t, _ in chunk)))

    def collect(kind, n):
        out = []
        for k in range(n):
            (sa, ta), (sb, tb) = where[(kind, k)]
            out.append((sa, sb, jaccard(shingle(ta, shingle_len), shingle(tb, shingle_len))))
        return out

    return PlantedCorpus(docs, collect("pair", n_pairs), collect("decoy", n_decoys), len(tagged))
