"""Trace-link recommender for requirements and domain taxonomies.

Suggests associations between natural-language requirements and objects of
a domain-specific taxonomy, learns from accept/reject feedback, and ships
the analysis toolkit for the accompanying annotation experiment.
"""

from .analysis import (
    AssociationVector,
    GroupSummary,
    JudgmentRecord,
    UTestResult,
    accuracy_scores,
    agreement_buckets,
    build_report,
    confidence_distribution,
    consistency,
    duration_summary,
    encode_vectors,
    load_judgments,
    mann_whitney_u,
)
from .annotation_store import (
    AnnotationRecord,
    AnnotationStore,
    Association,
    Requirement,
    export_dataset,
    import_dataset,
    import_requirements,
)
from .embeddings import EmbeddingStore, cosine, load_embeddings, top_k_proxies
from .recommender import (
    SUPPRESSED,
    FeedbackEvent,
    HistoryStore,
    RecommenderConfig,
    Suggestion,
    combine_confidence,
    p_exact,
    p_history,
    p_similarity,
    record_feedback,
    suggest,
)
from .taxonomy import (
    NounIndex,
    Taxonomy,
    TaxonomyObject,
    build_noun_index,
    load_taxonomy,
    lookup,
    search_taxonomy,
)
from .textproc import (
    AnalyzerConfig,
    NounOccurrence,
    analyze,
    decompound,
    load_stopwords,
    stem,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyzerConfig",
    "AnnotationRecord",
    "AnnotationStore",
    "Association",
    "AssociationVector",
    "EmbeddingStore",
    "FeedbackEvent",
    "GroupSummary",
    "HistoryStore",
    "JudgmentRecord",
    "NounIndex",
    "NounOccurrence",
    "Requirement",
    "RecommenderConfig",
    "SUPPRESSED",
    "Suggestion",
    "Taxonomy",
    "TaxonomyObject",
    "UTestResult",
    "accuracy_scores",
    "agreement_buckets",
    "analyze",
    "build_noun_index",
    "build_report",
    "combine_confidence",
    "confidence_distribution",
    "consistency",
    "cosine",
    "decompound",
    "duration_summary",
    "encode_vectors",
    "export_dataset",
    "import_dataset",
    "import_requirements",
    "load_embeddings",
    "load_judgments",
    "load_stopwords",
    "load_taxonomy",
    "lookup",
    "mann_whitney_u",
    "p_exact",
    "p_history",
    "p_similarity",
    "record_feedback",
    "search_taxonomy",
    "stem",
    "suggest",
    "top_k_proxies",
]
