"""Walkthrough: load a taxonomy, build the noun index, look up and search.

Run from the repository root:

    python demos/01_taxonomy_indexing.py
"""

from pathlib import Path

from tracerec import AnalyzerConfig, build_noun_index, load_stopwords, load_taxonomy, lookup, search_taxonomy

DATA = Path(__file__).parent / "data"

# A light Swedish suffix stripper; stopwords come from a plain word list.
analyzer = AnalyzerConfig(
    language="sv",
    stemmer="suffix",
    stopwords=load_stopwords(DATA / "stopwords_sv.txt"),
)

taxonomy = load_taxonomy(DATA / "taxonomy_sv.jsonl")
print(f"Loaded {len(taxonomy)} taxonomy objects:")
for obj in taxonomy:
    parent = f" (part of {obj.parent_code})" if obj.parent_code else ""
    print(f"  {obj.code}: {obj.label}{parent}")

index = build_noun_index(taxonomy, analyzer)
print(f"\nNoun index covers {len(index)} stems.")

# f_noun is the number of objects a noun appears in: common nouns spread
# over many objects and therefore discriminate less.
for stem in ("bro", "räcke", "lamp", "cykelväg"):
    codes, f_noun = lookup(index, stem)
    print(f"  f_noun({stem!r}) = {f_noun}  -> {sorted(codes)}")

# Compounds in object text index under their parts too, when the parts
# occur as words of their own somewhere in the taxonomy: "järnvägsbro"
# contributes to both "järnväg" and "bro".
codes, _ = lookup(index, "järnväg")
print(f"\nObjects containing 'järnväg' (incl. via compounds): {sorted(codes)}")

print("\nFull-text search (the control arm of the annotation experiment):")
for query in ("bro räcke", "belysning tunnel", "cykelbana"):
    results = search_taxonomy(taxonomy, query, limit=3)
    print(f"  {query!r}:")
    for code, score in results:
        print(f"    {code} ({taxonomy.get(code).label}), matched tokens: {score}")
