"""Shared fixtures: a small taxonomy, unit-vector embeddings, requirements.

The embedding vectors are unit length so every cosine equals a plain dot
product and the expected predictor scores can be derived by hand:

    cos(bridge, overpass) = 0.6    cos(bridge, viaduct) = 0.8
    cos(bridge, tunnel)   = 0.0    cos(overpass, viaduct) = 0.96
    cos(overpass, tunnel) = 0.8    cos(viaduct, tunnel)  = 0.6

"viaduct" is deliberately absent from the taxonomy: it shows up as a proxy
but never produces an index hit.
"""

from __future__ import annotations

import json

import pytest

from tracerec.annotation_store import Requirement
from tracerec.embeddings import load_embeddings
from tracerec.taxonomy import build_noun_index, load_taxonomy
from tracerec.textproc import AnalyzerConfig

TAXONOMY_RECORDS = [
    {
        "code": "B01",
        "label": "bridge",
        "description": "structure carrying a road across water",
        "synonyms": ["overpass"],
        "parent_code": None,
    },
    {
        "code": "B02",
        "label": "road bridge",
        "description": "bridge for road traffic",
        "synonyms": [],
        "parent_code": None,
    },
    {
        "code": "R01",
        "label": "road",
        "description": "paved way for vehicles",
        "synonyms": [],
        "parent_code": None,
    },
    {
        "code": "T01",
        "label": "tunnel",
        "description": "underground passage",
        "synonyms": [],
        "parent_code": None,
    },
    {
        "code": "L01",
        "label": "lighting",
        "description": "lamps along roads and in tunnels",
        "synonyms": ["lamp"],
        "parent_code": None,
    },
]

EMBEDDINGS_TEXT = (
    "4 2\n"
    "bridge 1.0 0.0\n"
    "overpass 0.6 0.8\n"
    "viaduct 0.8 0.6\n"
    "tunnel 0.0 1.0\n"
)

REQUIREMENT_RECORDS = [
    {"id": "R1", "text": "The bridge shall be lit"},
    {"id": "R2", "text": "Road traffic may increase"},
    {"id": "R3", "text": "Overpass lighting near the roadbridge"},
]

STOPWORDS = (
    "the", "a", "an", "and", "or", "for", "in", "of", "on", "at",
    "to", "be", "is", "are", "shall", "may", "near", "with", "across", "along",
)


def taxonomy_document() -> str:
    lines = [json.dumps({"format": "taxonomy", "version": 1})]
    lines += [json.dumps(record) for record in TAXONOMY_RECORDS]
    return "\n".join(lines) + "\n"


def requirements_document() -> str:
    lines = [json.dumps({"format": "requirements", "version": 1})]
    lines += [json.dumps(record) for record in REQUIREMENT_RECORDS]
    return "\n".join(lines) + "\n"


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("fixture")
    (directory / "taxonomy.jsonl").write_text(taxonomy_document(), encoding="utf-8")
    (directory / "requirements.jsonl").write_text(requirements_document(), encoding="utf-8")
    (directory / "embeddings.txt").write_text(EMBEDDINGS_TEXT, encoding="utf-8")
    (directory / "stopwords.txt").write_text("\n".join(STOPWORDS) + "\n", encoding="utf-8")
    return directory


@pytest.fixture(scope="session")
def analyzer():
    return AnalyzerConfig(
        language="en",
        stemmer="identity",
        stopwords=STOPWORDS,
        decompound=True,
        min_token_length=2,
    )


@pytest.fixture(scope="session")
def taxonomy(fixture_dir):
    return load_taxonomy(fixture_dir / "taxonomy.jsonl")


@pytest.fixture(scope="session")
def noun_index(taxonomy, analyzer):
    return build_noun_index(taxonomy, analyzer)


@pytest.fixture(scope="session")
def embeddings(fixture_dir):
    return load_embeddings(fixture_dir / "embeddings.txt")


@pytest.fixture(scope="session")
def requirements():
    return [Requirement(r["id"], r["text"]) for r in REQUIREMENT_RECORDS]


# Hand-derived suggestion oracle for the fixture above, frozen before the
# engine was written. Tuples are (stem, code, p_exact, p_similarity,
# p_history); None marks an absent predictor.
FIXTURE_ORACLE = {
    "R1": [
        ("bridge", "B01", 0.5, 0.6, None),
        ("bridge", "B02", 0.5, None, None),
    ],
    "R2": [
        ("traffic", "B02", 1.0, None, None),
        ("road", "B01", 1 / 3, None, None),
        ("road", "B02", 1 / 3, None, None),
        ("road", "R01", 1 / 3, None, None),
    ],
    "R3": [
        ("overpass", "B01", 1.0, 0.3, None),
        ("bridge", "B01", 0.5, 0.6, None),
        ("lighting", "L01", 1.0, None, None),
        ("overpass", "T01", None, 0.8, None),
        ("bridge", "B02", 0.5, None, None),
        ("road", "B01", 1 / 3, None, None),
        ("road", "B02", 1 / 3, None, None),
        ("road", "R01", 1 / 3, None, None),
        ("overpass", "B02", None, 0.3, None),
    ],
}


def oracle_confidence(pe, ps, ph):
    return ((pe or 0.0) + (ps or 0.0) + (ph or 0.0)) / 3


def oracle_u_by_pair_counting(group_a, group_b):
    """U of group_a by direct pair counting: wins plus half-ties."""
    u = 0.0
    for a in group_a:
        for b in group_b:
            if a > b:
                u += 1.0
            elif a == b:
                u += 0.5
    return u


def oracle_exact_p(group_a, group_b):
    """Brute-force two-sided exact p over every group labeling."""
    import itertools

    pooled = list(group_a) + list(group_b)
    n1 = len(group_a)
    mu = n1 * len(group_b) / 2
    u_obs = oracle_u_by_pair_counting(group_a, group_b)
    extreme = 0
    total = 0
    for combo in itertools.combinations(range(len(pooled)), n1):
        chosen = set(combo)
        sample_a = [pooled[i] for i in combo]
        sample_b = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        u = oracle_u_by_pair_counting(sample_a, sample_b)
        if abs(u - mu) >= abs(u_obs - mu):
            extreme += 1
        total += 1
    return u_obs, extreme / total


def random_scene(rng):
    """A small random taxonomy + embeddings + history + requirement.

    Weight sets are dyadic so the aggregation cannot leave [0, 1] even in
    floating point.
    """
    from tracerec.embeddings import EmbeddingStore
    from tracerec.recommender import FeedbackEvent, HistoryStore, RecommenderConfig
    from tracerec.taxonomy import Taxonomy, TaxonomyObject, build_noun_index

    identity = AnalyzerConfig(language="en", stemmer="identity")
    pool = ["bro", "väg", "tunnel", "ljus", "räcke", "spår", "vatten", "stolpe"]
    n_objects = rng.randint(2, 6)
    objects = []
    for i in range(n_objects):
        label = " ".join(rng.sample(pool, rng.randint(1, 2)))
        description = " ".join(rng.sample(pool, rng.randint(0, 3)))
        objects.append(TaxonomyObject(f"O{i:02d}", label, description))
    taxonomy = Taxonomy(objects)
    index = build_noun_index(taxonomy, identity)

    store = None
    if rng.random() < 0.8:
        dim = rng.randint(2, 4)
        words = rng.sample(pool, rng.randint(2, len(pool)))
        vectors = {}
        for word in words:
            vec = [rng.uniform(-1, 1) for _ in range(dim)]
            if all(abs(v) < 1e-9 for v in vec):
                vec[0] = 1.0
            vectors[word] = vec
        store = EmbeddingStore(dim, vectors)

    history = HistoryStore()
    ts = 0.0
    for _ in range(rng.randint(0, 12)):
        ts += 1.0
        history.record(
            FeedbackEvent(
                ts,
                "P1",
                "R1",
                rng.choice(pool),
                f"O{rng.randint(0, n_objects - 1):02d}",
                "accept" if rng.random() < 0.6 else "reject",
            )
        )

    weights = rng.choice(
        [
            (1 / 3, 1 / 3, 1 / 3),
            (0.5, 0.25, 0.25),
            (0.5, 0.5, 0.0),
            (1.0, 0.0, 0.0),
            (0.25, 0.25, 0.5),
        ]
    )
    config = RecommenderConfig(
        k_proxies=rng.randint(1, 10),
        rejection_threshold=rng.randint(1, 6),
        weights=weights,
    )
    text = " ".join(
        rng.choice(pool + ["och", "skall", "vara"]) for _ in range(rng.randint(3, 10))
    )
    return Requirement("RQ", text), index, store, history, config
