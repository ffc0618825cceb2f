"""End-to-end explained retrieval: expansion, ranking, re-ranking, and the
most important sentence per result, captured in one auditable record.

The record carries every number needed to recompute the ranking by hand:
embedding score and rank, the QDR value with its per-query-entity
breakdown, and the MIS with its similarity. It serializes to JSON and
parses back losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .expansion import ExpandedQuery, ExpansionCase, expand
from .kg import KnowledgeGraph
from .linking import (
    ENTITY,
    RELATION,
    Gazetteer,
    GoldAnnotations,
    LinkedMention,
    build_gazetteer,
    distinct_entity_ids,
    link,
    link_gold,
)
from .rerank import rerank
from .retrieval import DocumentIndex, retrieve, select_mis


@dataclass(frozen=True)
class DocExplanation:
    """One ranked document with the evidence behind its position."""

    doc_id: str
    final_rank: int
    embedding_score: float
    embedding_rank: int
    qdr_value: float | None
    qdr_breakdown: tuple[tuple[str, float], ...] | None
    mis_index: int | None
    mis_text: str | None
    mis_score: float | None


@dataclass(frozen=True)
class ExplanationRecord:
    query_id: str
    query: str
    expansion_case: str
    appended_terms: tuple[str, ...]
    entity_ids: tuple[str, ...]
    relation_ids: tuple[str, ...]
    k: int
    linker: str
    relatedness: str
    results: tuple[DocExplanation, ...]

    def to_json(self) -> str:
        payload = {
            "query_id": self.query_id,
            "query": self.query,
            "expansion_case": self.expansion_case,
            "appended_terms": list(self.appended_terms),
            "entity_ids": list(self.entity_ids),
            "relation_ids": list(self.relation_ids),
            "k": self.k,
            "linker": self.linker,
            "relatedness": self.relatedness,
            "results": [
                {
                    "doc_id": r.doc_id,
                    "final_rank": r.final_rank,
                    "embedding_score": r.embedding_score,
                    "embedding_rank": r.embedding_rank,
                    "qdr_value": r.qdr_value,
                    "qdr_breakdown": (
                        None
                        if r.qdr_breakdown is None
                        else [[eid, value] for eid, value in r.qdr_breakdown]
                    ),
                    "mis_index": r.mis_index,
                    "mis_text": r.mis_text,
                    "mis_score": r.mis_score,
                }
                for r in self.results
            ],
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "ExplanationRecord":
        payload = json.loads(text)
        results = tuple(
            DocExplanation(
                doc_id=r["doc_id"],
                final_rank=r["final_rank"],
                embedding_score=r["embedding_score"],
                embedding_rank=r["embedding_rank"],
                qdr_value=r["qdr_value"],
                qdr_breakdown=(
                    None
                    if r["qdr_breakdown"] is None
                    else tuple((eid, value) for eid, value in r["qdr_breakdown"])
                ),
                mis_index=r["mis_index"],
                mis_text=r["mis_text"],
                mis_score=r["mis_score"],
            )
            for r in payload["results"]
        )
        return cls(
            query_id=payload["query_id"],
            query=payload["query"],
            expansion_case=payload["expansion_case"],
            appended_terms=tuple(payload["appended_terms"]),
            entity_ids=tuple(payload["entity_ids"]),
            relation_ids=tuple(payload["relation_ids"]),
            k=payload["k"],
            linker=payload["linker"],
            relatedness=payload["relatedness"],
            results=results,
        )

    def format_block(self) -> str:
        """Human-readable explanation block."""
        lines = [f"query [{self.query_id}]: {self.query}"]
        if self.expansion_case != ExpansionCase.NONE.value:
            lines.append(
                f"expansion: case {self.expansion_case}; appended: "
                + (" ".join(self.appended_terms) if self.appended_terms else "(nothing)")
            )
        else:
            lines.append("expansion: none")
        if self.entity_ids:
            lines.append("matched entities: " + ", ".join(self.entity_ids))
        if self.relation_ids:
            lines.append("matched relations: " + ", ".join(self.relation_ids))
        for r in self.results:
            parts = [f"{r.final_rank:3d}. {r.doc_id}  embed={r.embedding_score:.4f}"]
            if r.qdr_value is not None:
                parts.append(f"qdr={r.qdr_value:.4f}")
            lines.append("  ".join(parts))
            if r.qdr_breakdown:
                lines.append(
                    "     qdr breakdown: "
                    + ", ".join(f"{eid}={value:.4f}" for eid, value in r.qdr_breakdown)
                )
            if r.mis_index is not None:
                lines.append(f"     MIS[{r.mis_index}] ({r.mis_score:.4f}): {r.mis_text}")
        return "\n".join(lines) + "\n"


def _mentions_for_query(
    query_id: str,
    query_text: str,
    linker: str,
    gazetteer: Gazetteer | None,
    gold_links: GoldAnnotations | None,
    kg: KnowledgeGraph | None,
) -> list[LinkedMention]:
    if linker == "off":
        return []
    if linker == "gazetteer":
        assert gazetteer is not None
        return link(query_text, gazetteer)
    assert gold_links is not None and kg is not None
    if query_id not in gold_links.links:
        return []
    return link_gold(query_id, gold_links, kg)


def explain_query(
    index: DocumentIndex,
    query_text: str,
    *,
    query_id: str = "q",
    k: int = 10,
    kg: KnowledgeGraph | None = None,
    linker: str = "off",
    gold_links: GoldAnnotations | None = None,
    expansion_on: bool = False,
    relatedness: str = "off",
) -> ExplanationRecord:
    """Run the full pipeline for one query and return the explanation record.

    ``linker`` chooses where mentions come from (``off``/``gazetteer``/
    ``gold``); ``expansion_on`` applies them to the query text; a
    ``relatedness`` mode other than ``off`` re-ranks candidates by QDR.
    A KG is required unless the linker is off and relatedness is off.
    """
    needs_kg = linker != "off" or expansion_on or relatedness != "off"
    if needs_kg and kg is None:
        raise ValueError("a knowledge graph is required for linking, expansion, or re-ranking")
    if linker == "gold" and gold_links is None:
        raise ValueError("gold linker requires gold annotations")

    gazetteer = build_gazetteer(kg) if (kg is not None and linker == "gazetteer") else None
    mentions = _mentions_for_query(query_id, query_text, linker, gazetteer, gold_links, kg)

    if expansion_on and kg is not None:
        expanded: ExpandedQuery | str = expand(query_text, mentions, kg)
        case = expanded.case.value
        appended = expanded.appended_terms
        entity_ids = expanded.entity_ids
        relation_ids = expanded.relation_ids
        query_used: ExpandedQuery | str = expanded
    else:
        case = ExpansionCase.NONE.value
        appended = ()
        entity_ids = tuple(dict.fromkeys(m.id for m in mentions if m.kind == ENTITY))
        relation_ids = tuple(dict.fromkeys(m.id for m in mentions if m.kind == RELATION))
        query_used = query_text

    candidates = retrieve(index, query_used, k)

    results: list[DocExplanation] = []
    if relatedness != "off" and kg is not None:
        entities_by_doc = index.entities_by_doc
        if entities_by_doc is None:
            doc_gazetteer = gazetteer if gazetteer is not None else build_gazetteer(kg)
            entities_by_doc = {
                doc_id: distinct_entity_ids(doc.text, doc_gazetteer)
                for doc_id, doc in index.documents.items()
            }
        ordered = rerank(candidates, entity_ids, kg, entities_by_doc, mode=relatedness)
        for r in ordered:
            results.append(
                DocExplanation(
                    doc_id=r.doc_id,
                    final_rank=r.rank,
                    embedding_score=r.embedding_score,
                    embedding_rank=r.embedding_rank,
                    qdr_value=r.relatedness.value,
                    qdr_breakdown=r.relatedness.breakdown,
                    mis_index=None,
                    mis_text=None,
                    mis_score=None,
                )
            )
    else:
        for c in candidates:
            results.append(
                DocExplanation(
                    doc_id=c.doc_id,
                    final_rank=c.rank,
                    embedding_score=c.score,
                    embedding_rank=c.rank,
                    qdr_value=None,
                    qdr_breakdown=None,
                    mis_index=None,
                    mis_text=None,
                    mis_score=None,
                )
            )

    with_mis: list[DocExplanation] = []
    for r in results:
        if index.sentences[r.doc_id]:
            mis = select_mis(index, r.doc_id, query_used)
            r = DocExplanation(
                doc_id=r.doc_id,
                final_rank=r.final_rank,
                embedding_score=r.embedding_score,
                embedding_rank=r.embedding_rank,
                qdr_value=r.qdr_value,
                qdr_breakdown=r.qdr_breakdown,
                mis_index=mis.index,
                mis_text=mis.text,
                mis_score=mis.score,
            )
        with_mis.append(r)

    return ExplanationRecord(
        query_id=query_id,
        query=query_text,
        expansion_case=case,
        appended_terms=tuple(appended),
        entity_ids=tuple(entity_ids),
        relation_ids=tuple(relation_ids),
        k=k,
        linker=linker,
        relatedness=relatedness,
        results=tuple(with_mis),
    )
