"""Command-line surface: build an index, ask explained queries, run the two
evaluation protocols, and lint a knowledge graph.

Exit codes: 0 success, 1 usage/config error (bad flags, missing files),
2 data/format error (malformed fixture lines, bad ids). All commands are
deterministic given identical inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .artifacts import load_index, save_index
from .errors import DataFormatError
from .evaluation import (
    EvalReport,
    compare_mis_modes,
    load_qrels,
    load_queries,
    load_sentence_gold,
    run_rerank_experiment,
)
from .explain import explain_query
from .kg import KnowledgeGraph, load_kg
from .linking import GoldAnnotations, build_gazetteer, load_gold_annotations
from .retrieval import build_index, load_corpus
from .text import fit_embedder


class UsageError(Exception):
    """Configuration problem: wrong flag combination or unusable value."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_kg_flags(parser: argparse.ArgumentParser, required: bool = False) -> None:
    parser.add_argument("--kg-entities", metavar="PATH", required=required)
    parser.add_argument("--kg-relations", metavar="PATH", required=required)
    parser.add_argument("--kg-edges", metavar="PATH", required=required)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kgxir", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", parents=[], help="build and persist a document index")
    p_index.add_argument("--corpus", metavar="PATH", required=True)
    p_index.add_argument("--index", metavar="PATH", required=True, help="output artifact path")
    _add_kg_flags(p_index)

    p_query = sub.add_parser("query", help="run one explained query against a persisted index")
    p_query.add_argument("query_text", metavar="QUERY")
    p_query.add_argument("--index", metavar="PATH", required=True)
    _add_kg_flags(p_query)
    p_query.add_argument("--linker", choices=["gazetteer", "gold", "off"], default="off")
    p_query.add_argument("--gold-links", metavar="PATH")
    p_query.add_argument("--expand", choices=["on", "off"], default="off")
    p_query.add_argument("--relatedness", choices=["raw", "complement", "off"], default="off")
    p_query.add_argument("--k", type=int, default=10)
    p_query.add_argument("--query-id", default="q", help="query id, used for gold links lookup")
    p_query.add_argument("--out", metavar="PATH", help="also write the JSON record here")
    p_query.add_argument("--json", action="store_true", help="print the JSON record, not the block")

    p_mis = sub.add_parser("eval-mis", help="sentence-retrieval experiment across linker modes")
    p_mis.add_argument("--corpus", metavar="PATH", required=True)
    _add_kg_flags(p_mis, required=True)
    p_mis.add_argument("--queries", metavar="PATH", required=True)
    p_mis.add_argument("--sentence-gold", metavar="PATH", required=True)
    p_mis.add_argument("--gold-links", metavar="PATH")
    p_mis.add_argument("--out", metavar="PATH", help="write line-delimited records here")
    p_mis.add_argument("--json", action="store_true", help="print records instead of the table")

    p_rerank = sub.add_parser("eval-rerank", help="embedding order vs QDR re-ranking experiment")
    p_rerank.add_argument("--corpus", metavar="PATH", required=True)
    _add_kg_flags(p_rerank, required=True)
    p_rerank.add_argument("--queries", metavar="PATH", required=True)
    p_rerank.add_argument("--qrels", metavar="PATH", required=True)
    p_rerank.add_argument("--k", type=int, default=10)
    p_rerank.add_argument("--linker", choices=["gazetteer", "gold", "off"], default="gazetteer")
    p_rerank.add_argument("--gold-links", metavar="PATH")
    p_rerank.add_argument("--relatedness", choices=["raw", "complement"], default="complement")
    p_rerank.add_argument("--out", metavar="PATH", help="write line-delimited records here")
    p_rerank.add_argument("--json", action="store_true", help="print records instead of the table")

    p_validate = sub.add_parser("kg-validate", help="load a KG and report diagnostics")
    _add_kg_flags(p_validate, required=True)

    return parser


def _require_file(path: str | None, flag: str) -> Path:
    if path is None:
        raise UsageError(f"{flag} is required for this invocation")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{flag}: no such file: {p}")
    return p


def _load_kg_from_args(args: argparse.Namespace, required: bool) -> KnowledgeGraph | None:
    flags = (args.kg_entities, args.kg_relations, args.kg_edges)
    if all(f is None for f in flags):
        if required:
            raise UsageError("--kg-entities/--kg-relations/--kg-edges are required here")
        return None
    if any(f is None for f in flags):
        raise UsageError("--kg-entities, --kg-relations and --kg-edges must be given together")
    return load_kg(
        _require_file(args.kg_entities, "--kg-entities"),
        _require_file(args.kg_relations, "--kg-relations"),
        _require_file(args.kg_edges, "--kg-edges"),
    )


def _load_gold(args: argparse.Namespace, kg: KnowledgeGraph) -> GoldAnnotations | None:
    if args.gold_links is None:
        return None
    return load_gold_annotations(_require_file(args.gold_links, "--gold-links"), kg)


def _emit_report(report: EvalReport, args: argparse.Namespace) -> None:
    if args.json:
        for record in report.to_records():
            print(json.dumps(record, sort_keys=True, ensure_ascii=False))
    else:
        print(report.format_table(), end="")
    if args.out:
        report.write_records(args.out)


def cmd_index(args: argparse.Namespace) -> int:
    corpus = load_corpus(_require_file(args.corpus, "--corpus"))
    kg = _load_kg_from_args(args, required=False)
    gazetteer = build_gazetteer(kg) if kg is not None else None
    model = fit_embedder([doc.embedding_text for doc in corpus])
    index = build_index(corpus, model, gazetteer=gazetteer)
    save_index(index, args.index)
    print(
        f"indexed {len(index.documents)} documents "
        f"({index.model.dimension} terms) -> {args.index}"
    )
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    query_text = args.query_text.strip()
    if not query_text:
        raise UsageError("query text must not be empty")
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    index = load_index(_require_file(args.index, "--index"))
    needs_kg = args.linker != "off" or args.expand == "on" or args.relatedness != "off"
    kg = _load_kg_from_args(args, required=needs_kg)
    gold = _load_gold(args, kg) if kg is not None else None
    if args.linker == "gold" and gold is None:
        raise UsageError("--linker gold requires --gold-links")
    record = explain_query(
        index,
        query_text,
        query_id=args.query_id,
        k=args.k,
        kg=kg,
        linker=args.linker,
        gold_links=gold,
        expansion_on=args.expand == "on",
        relatedness=args.relatedness,
    )
    if args.json:
        print(record.to_json())
    else:
        print(record.format_block(), end="")
    if args.out:
        Path(args.out).write_text(record.to_json() + "\n", encoding="utf-8")
    return 0


def cmd_eval_mis(args: argparse.Namespace) -> int:
    corpus = load_corpus(_require_file(args.corpus, "--corpus"))
    kg = _load_kg_from_args(args, required=True)
    assert kg is not None
    gold = _load_gold(args, kg)
    queries = load_queries(_require_file(args.queries, "--queries"))
    sentence_gold = load_sentence_gold(_require_file(args.sentence_gold, "--sentence-gold"))
    report = compare_mis_modes(corpus, kg, queries, sentence_gold, gold_links=gold)
    _emit_report(report, args)
    return 0


def cmd_eval_rerank(args: argparse.Namespace) -> int:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    corpus = load_corpus(_require_file(args.corpus, "--corpus"))
    kg = _load_kg_from_args(args, required=True)
    assert kg is not None
    gold = _load_gold(args, kg)
    if args.linker == "gold" and gold is None:
        raise UsageError("--linker gold requires --gold-links")
    queries = load_queries(_require_file(args.queries, "--queries"))
    qrels = load_qrels(_require_file(args.qrels, "--qrels"))
    report = run_rerank_experiment(
        corpus,
        kg,
        queries,
        qrels,
        k=args.k,
        linker_mode=args.linker,
        gold_links=gold,
        relatedness_mode=args.relatedness,
    )
    _emit_report(report, args)
    return 0


def cmd_kg_validate(args: argparse.Namespace) -> int:
    kg = _load_kg_from_args(args, required=True)
    assert kg is not None
    diagnostics = kg.validate()
    gazetteer = build_gazetteer(kg)
    for message in diagnostics:
        print(f"warning: {message}")
    for message in gazetteer.diagnostics:
        print(f"warning: {message}")
    if not diagnostics and not gazetteer.diagnostics:
        print(f"ok: {kg.node_count} entities, {len(kg.relations)} relations, {len(kg.edges)} edges")
    return 0


_COMMANDS = {
    "index": cmd_index,
    "query": cmd_query,
    "eval-mis": cmd_eval_mis,
    "eval-rerank": cmd_eval_rerank,
    "kg-validate": cmd_kg_validate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"kgxir: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"kgxir: error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except DataFormatError as exc:
        print(f"kgxir: data error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"kgxir: data error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
