"""Walkthrough: the annotation workflow end to end, in process.

Drives the same engine the HTTP service exposes: one recommender-arm
session and one search-arm session annotate the same requirements in the
same order; durations are measured by the service, and the collected
records export as the analysis dataset.

    python demos/03_annotation_session.py
"""

from pathlib import Path

from tracerec import (
    AnalyzerConfig,
    build_noun_index,
    export_dataset,
    import_requirements,
    load_embeddings,
    load_stopwords,
    load_taxonomy,
)
from tracerec.service import ServiceEngine

DATA = Path(__file__).parent / "data"


class DemoClock:
    """Deterministic stand-in for time.time()."""

    def __init__(self):
        self.now = 1000.0

    def __call__(self):
        return self.now


clock = DemoClock()
analyzer = AnalyzerConfig(
    language="sv", stemmer="suffix", stopwords=load_stopwords(DATA / "stopwords_sv.txt")
)
taxonomy = load_taxonomy(DATA / "taxonomy_sv.jsonl")
engine = ServiceEngine(
    taxonomy=taxonomy,
    index=build_noun_index(taxonomy, analyzer),
    requirements=import_requirements(DATA / "requirements_sv.jsonl")[:3],
    embeddings=load_embeddings(DATA / "embeddings_sv.txt"),
    analyzer=analyzer,
    clock=clock,
)

alice = engine.open_session("alice", "ccr")
bob = engine.open_session("bob", "search")
print(f"alice -> {alice.treatment} arm, bob -> {bob.treatment} arm")

while True:
    task = engine.task_payload(alice)
    if task["done"]:
        break
    requirement = task["requirement"]
    print(f"\nalice opens {requirement['id']}: {requirement['text']!r}")
    for card in task["suggestions"][:3]:
        print(f"  suggested: {card['stem']!r} -> {card['code']} ({card['label']}) "
              f"confidence {card['confidence']:.3f}")

    # accept the top suggestion, if any, then submit with low confidence
    if task["suggestions"]:
        top = task["suggestions"][0]
        from tracerec.recommender import FeedbackEvent, record_feedback

        record_feedback(
            engine.history,
            FeedbackEvent(clock(), "alice", requirement["id"], top["stem"], top["code"], "accept"),
        )
        alice.decided.add((top["stem"], top["code"]))
        alice.accepted.append({"stem": top["stem"], "code": top["code"]})
        associations = [(top["stem"], top["code"])]
    else:
        associations = []

    clock.now += 45.0  # alice thinks for 45 seconds
    from tracerec.annotation_store import AnnotationRecord

    engine.annotations.append_record(
        AnnotationRecord(
            participant="alice",
            treatment="ccr",
            requirement_id=requirement["id"],
            duration_s=clock() - alice.open_ts,
            conf_correct=-1,
            conf_complete=-2,
            associations=tuple(associations),
        )
    )
    alice.task_index += 1
    alice.open_ts = None
    alice.decided = set()
    alice.accepted = []

# bob works through the same list with the search endpoint instead
while True:
    task = engine.task_payload(bob)
    if task["done"]:
        break
    requirement = task["requirement"]
    assert "suggestions" not in task  # treatment isolation
    clock.now += 90.0
    from tracerec.annotation_store import AnnotationRecord

    engine.annotations.append_record(
        AnnotationRecord(
            participant="bob",
            treatment="search",
            requirement_id=requirement["id"],
            duration_s=clock() - bob.open_ts,
            conf_correct=0,
            conf_complete=-1,
            associations=(),
        )
    )
    bob.task_index += 1
    bob.open_ts = None

print(f"\nalice accepted pairs recorded in history: {engine.history.pairs()}")
print("\nExported dataset:")
print(export_dataset(engine.annotations))
