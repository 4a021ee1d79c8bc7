"""Walkthrough: ranked suggestions, the three predictors, and feedback.

Shows how candidate associations are scored (exact match, embedding-proxy
similarity, history), how accepted decisions lift future rankings, and how
five rejections permanently suppress a pair.

    python demos/02_suggestions_and_feedback.py
"""

from pathlib import Path

from tracerec import (
    AnalyzerConfig,
    FeedbackEvent,
    HistoryStore,
    build_noun_index,
    import_requirements,
    load_embeddings,
    load_stopwords,
    load_taxonomy,
    record_feedback,
    suggest,
)

DATA = Path(__file__).parent / "data"

analyzer = AnalyzerConfig(
    language="sv",
    stemmer="suffix",
    stopwords=load_stopwords(DATA / "stopwords_sv.txt"),
)
taxonomy = load_taxonomy(DATA / "taxonomy_sv.jsonl")
index = build_noun_index(taxonomy, analyzer)
embeddings = load_embeddings(DATA / "embeddings_sv.txt")
requirements = {r.id: r for r in import_requirements(DATA / "requirements_sv.jsonl")}
history = HistoryStore()


def show(requirement, limit=6):
    ranked = suggest(requirement, index, embeddings, history, analyzer=analyzer)
    print(f"\n{requirement.id}: {requirement.text!r}")
    for s in ranked[:limit]:
        predictors = []
        if s.p_exact is not None:
            predictors.append(f"exact={s.p_exact:.3f}")
        if s.p_similarity is not None:
            predictors.append(f"sim={s.p_similarity:.3f} via {s.proxy!r}")
        if s.p_history is not None:
            predictors.append(f"hist={s.p_history:.3f}")
        label = taxonomy.get(s.code).label
        print(
            f"  {s.confidence:.4f}  {s.occurrence.stem!r} -> {s.code} ({label})"
            f"  [{', '.join(predictors)}]"
        )
    return ranked


# K4 contains the compound "Järnvägsbroar": the whole token matches the
# "järnvägsbro" object exactly, and its parts järnväg/bro match further
# objects.
show(requirements["K4"])

# K5 contains "armatur", which is absent from the taxonomy. The embedding
# proxies "belysning"/"lampa" bridge the vocabulary gap.
show(requirements["K5"])

# Feedback: accepting (bro -> BRO01) three times builds up history, which
# lifts that pair the next time any requirement mentions the noun.
ts = 0.0
for _ in range(3):
    ts += 1.0
    record_feedback(history, FeedbackEvent(ts, "demo", "K1", "bro", "BRO01", "accept"))
print("\nAfter accepting (bro -> BRO01) three times:")
show(requirements["K1"], limit=6)

# Rejecting a pair five times (the default threshold) suppresses it for
# good; it never reappears, whatever happens later.
for _ in range(5):
    ts += 1.0
    record_feedback(history, FeedbackEvent(ts, "demo", "K1", "bro", "VAT01", "reject"))
print("\nAfter rejecting (bro -> VAT01) five times (suppressed):")
ranked = show(requirements["K1"], limit=10)
assert all(not (s.occurrence.stem == "bro" and s.code == "VAT01") for s in ranked)
print("  (bro -> VAT01) is gone, as promised.")
