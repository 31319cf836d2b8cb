"""Near-duplicate sentence detection with multi-signature minhash."""

from .clusters import (
    ClusterStats,
    MergedCluster,
    UnionFind,
    apply_second_pass,
    compute_stats,
    merge_clusters,
    reconstruct,
    second_pass_filter,
)
from .corpus import (
    CorpusError,
    CorpusSource,
    Document,
    SentenceRecord,
    chunk_sentences,
    iter_sentences,
    filter_articles,
    parse_mediawiki_dump,
    parse_plaintext,
    strip_markup,
)
from .minhash import (
    HashFamily,
    PipelineParams,
    Signature,
    SignatureSelections,
    base_hash,
    estimate_intermediate_volume,
    expected_recall,
    family_hash,
    jaccard,
    make_selections,
    minhash_vector,
    recall_curve,
    selection_recall,
    shingle,
    signatures,
)
from .pipeline import Emission, RawCluster, group_by_signature, map_document, run_pipeline
from .taxonomy import ClusterLabel, Label, classify, format_table, sample_clusters, tabulate

__version__ = "0.1.0"
