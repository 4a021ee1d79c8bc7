"""Command-line interface.

Verbs:
  index    build the taxonomy noun index and write it as JSON
  suggest  batch-score requirements and write ranked suggestions as JSON lines
  serve    run the annotation HTTP service
  analyze  compute the analysis report from a dataset export

Output of ``index`` and ``suggest`` is deterministic: identical inputs
produce byte-identical files. Behavior is controlled by flags only;
environment variables are reserved for secrets.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import build_report, load_judgments
from .annotation_store import AnnotationStore, import_dataset, import_requirements
from .embeddings import load_embeddings
from .recommender import HistoryStore, RecommenderConfig, suggest
from .taxonomy import build_noun_index, load_taxonomy
from .textproc import AnalyzerConfig, load_stopwords


def _add_analyzer_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("analyzer")
    group.add_argument("--analyzer-config", help="JSON file with the full analyzer configuration")
    group.add_argument("--language", default="sv")
    group.add_argument("--stemmer", choices=["identity", "suffix"], default="suffix")
    group.add_argument("--stopwords", help="one-word-per-line stopword file")
    group.add_argument("--min-token-length", type=int, default=2)
    group.add_argument("--no-decompound", action="store_true")


def _analyzer_from_args(args: argparse.Namespace) -> AnalyzerConfig:
    if args.analyzer_config:
        return AnalyzerConfig.from_json(Path(args.analyzer_config).read_text(encoding="utf-8"))
    stopwords = load_stopwords(args.stopwords) if args.stopwords else ()
    return AnalyzerConfig(
        language=args.language,
        stemmer=args.stemmer,
        stopwords=stopwords,
        decompound=not args.no_decompound,
        min_token_length=args.min_token_length,
    )


def _add_recommender_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("recommender")
    group.add_argument("--k-proxies", type=int, default=10)
    group.add_argument("--rejection-threshold", type=int, default=5)
    group.add_argument(
        "--similarity-mode", choices=["prose-consistent", "literal"], default="prose-consistent"
    )
    group.add_argument("--min-proxy-cosine", type=float, default=0.0)


def _recommender_from_args(args: argparse.Namespace) -> RecommenderConfig:
    return RecommenderConfig(
        k_proxies=args.k_proxies,
        rejection_threshold=args.rejection_threshold,
        similarity_mode=args.similarity_mode,
        min_proxy_cosine=args.min_proxy_cosine,
    )


def _write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_index(args: argparse.Namespace) -> int:
    taxonomy = load_taxonomy(args.taxonomy)
    analyzer = _analyzer_from_args(args)
    index = build_noun_index(taxonomy, analyzer)
    document = {
        "format": "noun-index",
        "version": 1,
        "object_count": len(taxonomy),
        "stem_count": len(index),
        "entries": {stem: sorted(codes) for stem, codes in index.entries.items()},
    }
    _write_output(json.dumps(document, ensure_ascii=False, sort_keys=True, indent=2) + "\n", args.out)
    print(
        f"indexed {len(taxonomy)} objects into {len(index)} noun stems",
        file=sys.stderr,
    )
    return 0


def cmd_suggest(args: argparse.Namespace) -> int:
    taxonomy = load_taxonomy(args.taxonomy)
    analyzer = _analyzer_from_args(args)
    index = build_noun_index(taxonomy, analyzer)
    embeddings = load_embeddings(args.embeddings) if args.embeddings else None
    history = HistoryStore.load(args.history) if args.history else HistoryStore()
    config = _recommender_from_args(args)
    requirements = import_requirements(args.requirements)

    lines = []
    for requirement in requirements:
        ranked = suggest(requirement, index, embeddings, history, config, analyzer=analyzer)
        lines.append(
            json.dumps(
                {
                    "requirement": requirement.id,
                    "suggestions": [
                        {
                            "stem": s.occurrence.stem,
                            "surface": s.occurrence.surface,
                            "start": s.occurrence.start,
                            "end": s.occurrence.end,
                            "source": s.occurrence.source,
                            "code": s.code,
                            "p_exact": s.p_exact,
                            "p_similarity": s.p_similarity,
                            "p_history": s.p_history,
                            "confidence": s.confidence,
                            "proxy": s.proxy,
                        }
                        for s in ranked
                    ],
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceEngine, create_app

    taxonomy = load_taxonomy(args.taxonomy)
    analyzer = _analyzer_from_args(args)
    index = build_noun_index(taxonomy, analyzer)
    embeddings = load_embeddings(args.embeddings) if args.embeddings else None
    history = HistoryStore.load(args.history_log) if args.history_log else HistoryStore()
    requirements = import_requirements(args.requirements)
    annotations = AnnotationStore(requirements, persist_path=args.dataset_out)
    judgments = load_judgments(args.judgments) if args.judgments else None
    engine = ServiceEngine(
        taxonomy=taxonomy,
        index=index,
        requirements=requirements,
        embeddings=embeddings,
        history=history,
        annotations=annotations,
        config=_recommender_from_args(args),
        analyzer=analyzer,
        judgments=judgments,
    )
    uvicorn.run(create_app(engine), host=args.host, port=args.port)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    records = import_dataset(args.dataset)
    judgments = load_judgments(args.judgments) if args.judgments else None
    report = build_report(records, judgments, encoding=args.encoding)
    _write_output(json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracerec",
        description="Trace-link recommender and experiment analysis toolkit",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_index = subparsers.add_parser("index", help="build the taxonomy noun index")
    p_index.add_argument("--taxonomy", required=True)
    p_index.add_argument("--out", help="output path (default: stdout)")
    _add_analyzer_args(p_index)
    p_index.set_defaults(func=cmd_index)

    p_suggest = subparsers.add_parser("suggest", help="batch suggestions for a requirement file")
    p_suggest.add_argument("requirements", help="requirements document (JSON lines)")
    p_suggest.add_argument("--taxonomy", required=True)
    p_suggest.add_argument("--embeddings")
    p_suggest.add_argument("--history", help="feedback event log to replay")
    p_suggest.add_argument("--out", help="output path (default: stdout)")
    _add_analyzer_args(p_suggest)
    _add_recommender_args(p_suggest)
    p_suggest.set_defaults(func=cmd_suggest)

    p_serve = subparsers.add_parser("serve", help="run the annotation service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--taxonomy", required=True)
    p_serve.add_argument("--requirements", required=True)
    p_serve.add_argument("--embeddings")
    p_serve.add_argument("--history-log", help="append-only feedback event log path")
    p_serve.add_argument("--dataset-out", help="persist annotation records to this CSV")
    p_serve.add_argument("--judgments", help="expert judgment CSV for /v1/report")
    _add_analyzer_args(p_serve)
    _add_recommender_args(p_serve)
    p_serve.set_defaults(func=cmd_serve)

    p_analyze = subparsers.add_parser("analyze", help="compute the analysis report")
    p_analyze.add_argument("--dataset", required=True, help="annotation dataset export (CSV)")
    p_analyze.add_argument("--judgments", help="expert judgment CSV")
    p_analyze.add_argument(
        "--encoding", choices=["one-hot", "numeric-code"], default="one-hot"
    )
    p_analyze.add_argument("--out", help="output path (default: stdout)")
    p_analyze.set_defaults(func=cmd_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
