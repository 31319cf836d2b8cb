"""Rule-based labelling of near-duplicate clusters into six types.

This is a heuristic stand-in for manual inspection. Only the Identical rule
is exact; the rest are cheap token-alignment rules whose thresholds live in
``TaxonomyConfig``. Members are compared, after whitespace tokenisation,
against the lexicographically smallest distinct text, which makes the
result independent of member order.
"""

from __future__ import annotations

import difflib
import enum
import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .clusters import MergedCluster


class Label(str, enum.Enum):
    TEMPLATES = "Templates"
    IDENTICAL = "Identical"
    COPYEDITING = "Copyediting"
    FACTUAL_DRIFT = "FactualDrift"
    REFERENCES = "References"
    OTHER = "Other"


# display names in table order
LABEL_NAMES = {
    Label.TEMPLATES: "Templates",
    Label.IDENTICAL: "Identical",
    Label.COPYEDITING: "Copyediting",
    Label.FACTUAL_DRIFT: "Factual drift",
    Label.REFERENCES: "References",
    Label.OTHER: "Other",
}


@dataclass(frozen=True)
class ClusterLabel:
    label: Label
    evidence: str


@dataclass(frozen=True)
class TaxonomyConfig:
    # fraction of aligned tokens that must match for two texts to share a frame
    frame_ratio: float = 0.7
    # max fraction of differing tokens for Copyediting
    copyedit_max_diff: float = 0.3
    template_min_members: int = 3
    reference_min_matches: int = 2


_YEAR = re.compile(r"\b(1[5-9]\d\d|20\d\d)\b")
# a capitalised run, a comma, then another capitalised run
_NAME_LIST = re.compile(r"\b[A-Z][\w.\-']*(?:\s+[A-Z][\w.\-']*)*\s*,\s+[A-Z][\w.\-']*")


def looks_like_citation(text: str) -> bool:
    return bool(_YEAR.search(text) and _NAME_LIST.search(text))


def is_numeric_token(tok: str) -> bool:
    return any(ch.isdigit() for ch in tok) or "%" in tok


def _is_entity_token(tok: str) -> bool:
    return tok[:1].isupper()


@dataclass
class _Alignment:
    ratio: float
    diff_tokens: list[str]
    max_len: int


def _align(ref: list[str], other: list[str]) -> _Alignment:
    sm = difflib.SequenceMatcher(None, ref, other, autojunk=False)
    diffs: list[str] = []
    for op, i1, i2, j1, j2 in sm.get_opcodes():
        if op != "equal":
            diffs.extend(ref[i1:i2])
            diffs.extend(other[j1:j2])
    return _Alignment(sm.ratio(), diffs, max(len(ref), len(other)))


def classify(cluster: MergedCluster, config: TaxonomyConfig | None = None) -> ClusterLabel:
    """Assign one of the six labels to a cluster with attached texts."""
    cfg = config or TaxonomyConfig()
    if cluster.texts is None:
        raise ValueError("classify needs cluster texts; run reconstruct first")
    texts = cluster.texts
    distinct = sorted(set(texts))

    if len(distinct) == 1:
        return ClusterLabel(Label.IDENTICAL, "all member texts are byte-identical")

    cites = sum(looks_like_citation(t) for t in texts)
    if cites >= cfg.reference_min_matches:
        return ClusterLabel(Label.REFERENCES, f"{cites} members match year + name-list citation pattern")

    tokens = [t.split() for t in distinct]
    ref = tokens[0]
    aligns = [_align(ref, other) for other in tokens[1:]]
    min_ratio = min(a.ratio for a in aligns)
    if min_ratio < cfg.frame_ratio:
        return ClusterLabel(
            Label.OTHER, f"no shared frame: token match ratio {min_ratio:.2f} < {cfg.frame_ratio}"
        )

    diff_tokens = [tok for a in aligns for tok in a.diff_tokens]
    numeric = [tok for tok in diff_tokens if is_numeric_token(tok)]
    if (
        len(texts) >= cfg.template_min_members
        and numeric
        and all(is_numeric_token(t) or _is_entity_token(t) for t in diff_tokens)
    ):
        return ClusterLabel(
            Label.TEMPLATES,
            f"{len(texts)} members share a frame; differences confined to "
            f"numeric/name slots ({len(numeric)} numeric tokens)",
        )
    if numeric:
        return ClusterLabel(
            Label.FACTUAL_DRIFT,
            f"shared frame with differing numeric tokens {sorted(set(numeric))[:4]} "
            "(digit-based guess at the drift/copyedit boundary)",
        )
    diff_frac = max(len(a.diff_tokens) / a.max_len for a in aligns)
    if diff_frac <= cfg.copyedit_max_diff:
        return ClusterLabel(
            Label.COPYEDITING,
            f"non-numeric edits only, diff fraction {diff_frac:.2f} "
            "(digit-based guess at the drift/copyedit boundary)",
        )
    return ClusterLabel(Label.OTHER, f"non-numeric edits too large: diff fraction {diff_frac:.2f}")


def tabulate(labels: Iterable[ClusterLabel | Label]) -> list[tuple[Label, int, float]]:
    """Per-label count and fraction, one row per label in canonical order."""
    counts = {lab: 0 for lab in Label}
    for item in labels:
        counts[item.label if isinstance(item, ClusterLabel) else Label(item)] += 1
    total = sum(counts.values())
    return [(lab, n, n / total if total else 0.0) for lab, n in counts.items()]


def format_table(rows: Sequence[tuple[Label, int, float]]) -> str:
    lines = [f"{'type':<14}{'count':>7}{'fraction':>10}"]
    for lab, n, frac in rows:
        lines.append(f"{LABEL_NAMES[lab]:<14}{n:>7}{frac * 100:>9.1f}%")
    return "\n".join(lines)


def sample_clusters(clusters: Sequence[MergedCluster], k: int, seed: int = 0) -> list[MergedCluster]:
    """Uniform sample of ``k`` clusters without replacement, fixed by ``seed``."""
    if not 0 <= k <= len(clusters):
        raise ValueError(f"cannot sample {k} clusters from {len(clusters)}")
    return random.Random(seed).sample(list(clusters), k)
