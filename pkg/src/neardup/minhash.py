"""Shingling, multiply-shift minhash, signature draws and the recall model.

Shingle sets are represented as sorted, deduplicated ``uint64`` numpy arrays
of base hashes; minhash vectors as ``uint64`` arrays of length
``family_size``.

The string to integer reduction is a polynomial hash over the UTF-8 bytes of
a shingle::

    h = BASE_HASH_OFFSET
    for b in shingle.encode("utf-8"):
        h = (h * BASE_HASH_PRIME + b) mod 2**64

with ``BASE_HASH_OFFSET = 0xcbf29ce484222325`` and
``BASE_HASH_PRIME = 0x100000001b3``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

BASE_HASH_OFFSET = 0xCBF29CE484222325
BASE_HASH_PRIME = 0x100000001B3

_MASK64 = (1 << 64) - 1
_PRIME_INV = pow(BASE_HASH_PRIME, -1, 1 << 64)

# Sub-streams of the seed; keeps multipliers and draws independent.
_FAMILY_STREAM = 0x6D756C74
_SELECTION_STREAM = 0x64726177


@dataclass(frozen=True)
class PipelineParams:
    """Every knob of the detection pipeline. Defaults are the published run."""

    shingle_len: int = 12
    family_size: int = 20
    sig_len: int = 10
    num_sigs: int = 10
    hash_bits: int = 60
    min_shingles: int = 75
    max_shingles: int = 600
    seed: int = 0

    def __post_init__(self):
        if self.shingle_len < 1:
            raise ValueError(f"shingle_len must be >= 1, got {self.shingle_len}")
        if not 1 <= self.sig_len <= self.family_size:
            raise ValueError(
                f"need 1 <= sig_len <= family_size, got sig_len={self.sig_len}, "
                f"family_size={self.family_size}"
            )
        if self.num_sigs < 1:
            raise ValueError(f"num_sigs must be >= 1, got {self.num_sigs}")
        if self.num_sigs > 0xFFFF:
            raise ValueError("num_sigs must fit the 2-byte draw index of the key encoding")
        if not 1 <= self.hash_bits <= 64:
            raise ValueError(f"hash_bits must be in [1, 64], got {self.hash_bits}")
        if self.min_shingles > self.max_shingles:
            raise ValueError(
                f"min_shingles ({self.min_shingles}) > max_shingles ({self.max_shingles})"
            )
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineParams":
        return cls(**{k: int(v) for k, v in data.items()})


@dataclass(frozen=True, eq=False)
class HashFamily:
    """``family_size`` multiply-shift functions ``x -> (a_i * x mod 2**64) >> (64 - d)``."""

    seed: int
    multipliers: np.ndarray
    hash_bits: int

    @classmethod
    def from_seed(cls, seed: int, family_size: int, hash_bits: int = 60) -> "HashFamily":
        rng = np.random.default_rng([seed, _FAMILY_STREAM])
        a = rng.integers(0, 1 << 64, size=family_size, dtype=np.uint64, endpoint=False)
        a |= np.uint64(1)
        a.setflags(write=False)
        return cls(seed=seed, multipliers=a, hash_bits=hash_bits)

    @classmethod
    def from_params(cls, params: PipelineParams) -> "HashFamily":
        return cls.from_seed(params.seed, params.family_size, params.hash_bits)

    @property
    def size(self) -> int:
        return len(self.multipliers)

    @property
    def shift(self) -> np.uint64:
        return np.uint64(64 - self.hash_bits)


@dataclass(frozen=True)
class SignatureSelections:
    """The corpus-wide index draws; ``draws[m]`` picks ``sig_len`` coordinates."""

    draws: tuple[tuple[int, ...], ...]


class Signature(NamedTuple):
    draw_index: int
    values: tuple[int, ...]


def base_hash(shingle: str) -> int:
    """Polynomial 64-bit hash of the UTF-8 bytes of ``shingle``."""
    h = BASE_HASH_OFFSET
    for b in shingle.encode("utf-8"):
        h = (h * BASE_HASH_PRIME + b) & _MASK64
    return h


class _PowerTable:
    """Cached forward and inverse powers of the base-hash prime mod 2**64."""

    def __init__(self):
        self.fwd = np.ones(1, dtype=np.uint64)
        self.inv = np.ones(1, dtype=np.uint64)

    def ensure(self, n: int):
        if len(self.fwd) >= n:
            return
        size = max(n, 2 * len(self.fwd))
        self.fwd = _powers(BASE_HASH_PRIME, size)
        self.inv = _powers(_PRIME_INV, size)


def _powers(base: int, n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.uint64)
    out[0] = 1
    if n > 1:
        out[1:] = np.uint64(base)
        np.cumprod(out, out=out)
    return out


_POW = _PowerTable()


def shingle_hashes(text: str, shingle_len: int) -> np.ndarray:
    """Base hashes of every positional character n-gram, in order, with repeats.

    Equivalent to ``[base_hash(text[i:i+n]) for i in range(len(text)-n+1)]``
    but vectorised with prefix sums of the polynomial.
    """
    n_chars = len(text)
    if n_chars < shingle_len:
        raise ValueError(
            f"text has {n_chars} characters, fewer than shingle_len={shingle_len}"
        )
    cps = np.frombuffer(text.encode("utf-32-le"), dtype="<u4")
    byte_len = (
        1
        + (cps >= 0x80).astype(np.int64)
        + (cps >= 0x800).astype(np.int64)
        + (cps >= 0x10000).astype(np.int64)
    )
    offsets = np.zeros(n_chars + 1, dtype=np.int64)
    np.cumsum(byte_len, out=offsets[1:])

    data = np.frombuffer(text.encode("utf-8"), dtype=np.uint8).astype(np.uint64)
    n_bytes = len(data)
    _POW.ensure(n_bytes + 1)
    # prefix[i] = sum_{j<i} b_j * P^-j, so that
    # poly(b[s:e]) = P^(e-1) * (prefix[e] - prefix[s])
    prefix = np.zeros(n_bytes + 1, dtype=np.uint64)
    np.cumsum(data * _POW.inv[:n_bytes], out=prefix[1:])

    start = offsets[: n_chars - shingle_len + 1]
    end = offsets[shingle_len:]
    width = end - start
    poly = _POW.fwd[end - 1] * (prefix[end] - prefix[start])
    return np.uint64(BASE_HASH_OFFSET) * _POW.fwd[width] + poly


def shingle(text: str, shingle_len: int) -> np.ndarray:
    """The shingle set of ``text``: sorted distinct base hashes of its n-grams.

    Windows run over Unicode scalar values and cross word boundaries.
    Raises ``ValueError`` if ``text`` is shorter than ``shingle_len``.
    """
    return np.unique(shingle_hashes(text, shingle_len))


def family_hash(family: HashFamily, i: int, x: int) -> int:
    if not 0 <= i < family.size:
        raise IndexError(f"hash function index {i} out of range [0, {family.size})")
    a = int(family.multipliers[i])
    return ((a * x) & _MASK64) >> (64 - family.hash_bits)


def _as_set_array(shingles: Iterable[int] | np.ndarray) -> np.ndarray:
    if isinstance(shingles, np.ndarray):
        return shingles.astype(np.uint64, copy=False).ravel()
    return np.fromiter((int(s) for s in shingles), dtype=np.uint64)


def minhash_vector(shingles, family: HashFamily) -> np.ndarray:
    """``minima[i] = min_s family_hash(family, i, s)`` over the shingle set."""
    arr = _as_set_array(shingles)
    if arr.size == 0:
        raise ValueError("cannot minhash an empty shingle set")
    hashed = (family.multipliers[:, None] * arr[None, :]) >> family.shift
    return hashed.min(axis=1)


def make_selections(params: PipelineParams) -> SignatureSelections:
    rng = np.random.default_rng([params.seed, _SELECTION_STREAM])
    draws = tuple(
        tuple(int(i) for i in rng.choice(params.family_size, size=params.sig_len, replace=False))
        for _ in range(params.num_sigs)
    )
    return SignatureSelections(draws)


def signatures(minima: Sequence[int], selections: SignatureSelections) -> list[Signature]:
    vals = [int(v) for v in minima]
    return [
        Signature(m, tuple(vals[i] for i in draw)) for m, draw in enumerate(selections.draws)
    ]


def jaccard(a, b) -> float:
    a = np.unique(_as_set_array(a))
    b = np.unique(_as_set_array(b))
    if a.size == 0 or b.size == 0:
        raise ValueError("jaccard is undefined for empty sets")
    inter = np.intersect1d(a, b, assume_unique=True).size
    return inter / (a.size + b.size - inter)


def expected_recall(s: float, sig_len: int, num_sigs: int) -> float:
    """Probability that at least one of ``num_sigs`` signatures of length
    ``sig_len`` collides for two sets of Jaccard similarity ``s``:
    ``1 - (1 - s**K)**M``.
    """
    if not 0.0 <= s <= 1.0 or math.isnan(s):
        raise ValueError(f"similarity must lie in [0, 1], got {s}")
    if sig_len < 1 or num_sigs < 1:
        raise ValueError("sig_len and num_sigs must be >= 1")
    return 1.0 - (1.0 - s**sig_len) ** num_sigs


def selection_recall(s: float, selections: SignatureSelections) -> float:
    """Match probability for the actual, overlapping draws.

    ``expected_recall`` treats the M signatures as independent, which only
    holds when draws share no coordinates. Here each family member agrees
    independently with probability ``s`` and the match event is "some draw
    lies entirely inside the agreeing coordinates", evaluated exactly by
    inclusion-exclusion over subsets of draws.
    """
    if not 0.0 <= s <= 1.0 or math.isnan(s):
        raise ValueError(f"similarity must lie in [0, 1], got {s}")
    masks = [sum(1 << i for i in set(d)) for d in selections.draws]
    m = len(masks)
    if m > 20:
        raise ValueError("exact evaluation is limited to 20 draws")
    total = 0.0
    # union[S] built incrementally from S without its lowest bit
    union = [0] * (1 << m)
    for subset in range(1, 1 << m):
        low = subset & -subset
        union[subset] = union[subset ^ low] | masks[low.bit_length() - 1]
        sign = 1.0 if bin(subset).count("1") % 2 else -1.0
        total += sign * s ** bin(union[subset]).count("1")
    return total


def recall_curve(
    k_values: Sequence[int], num_sigs: int, s_grid: Sequence[float]
) -> list[tuple[int, float, float]]:
    return [(k, s, expected_recall(s, k, num_sigs)) for k in k_values for s in s_grid]


def default_s_grid(step: float = 0.05) -> list[float]:
    n = int(round(1.0 / step))
    return [round(i * step, 10) for i in range(n + 1)]


def signature_key_size(params: PipelineParams) -> int:
    """Bytes of one serialized signature key: 2-byte draw index plus K 8-byte values."""
    return 2 + 8 * params.sig_len


# doc_id (u64) + sentence_index (u32)
SENTENCE_ID_SIZE = 12


def estimate_intermediate_volume(params: PipelineParams, sentence_count: int) -> int:
    """Planning estimate of map-stage output in bytes.

    Sentences times signatures per sentence times the size of one emitted
    record (signature key plus sentence id).
    """
    record = signature_key_size(params) + SENTENCE_ID_SIZE
    return sentence_count * params.num_sigs * record
