"""Explainable re-ranking by query-document relatedness.

The feature is built from pairwise entity relatedness on the KG: for each
distinct query entity, average its relatedness to every distinct document
entity, then sum those averages. The per-query-entity breakdown is kept on
the score so a ranking can be audited term by term.

Re-ranking only reorders: the candidate set is preserved exactly, and ties
(including the no-entity degenerate case, which scores 0) keep the original
embedding order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .kg import KnowledgeGraph
from .linking import Gazetteer, distinct_entity_ids
from .retrieval import ScoredDoc


@dataclass(frozen=True)
class QdrScore:
    """Query-document relatedness with its per-query-entity breakdown.

    ``value`` is exactly the sum of the breakdown entries; the breakdown is
    ordered by entity id, one entry per distinct query entity.
    """

    value: float
    breakdown: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class RerankedDoc:
    doc_id: str
    rank: int
    embedding_score: float
    embedding_rank: int
    relatedness: QdrScore


def doc_entities(text: str, gazetteer: Gazetteer) -> list[str]:
    """Distinct entity ids linked in a document, in first-occurrence order."""
    return distinct_entity_ids(text, gazetteer)


def qdr(
    query_entities: Sequence[str],
    document_entities: Sequence[str],
    kg: KnowledgeGraph,
    mode: str = "complement",
) -> QdrScore:
    """Query-document relatedness over distinct entity ids.

    Both sides are deduplicated and canonicalized to sorted order before
    any arithmetic, so the result is exactly invariant under permutation
    (and duplication) of either input. Either side empty scores 0.
    """
    query_ids = sorted(set(query_entities))
    document_ids = sorted(set(document_entities))
    breakdown: list[tuple[str, float]] = []
    for query_id in query_ids:
        if document_ids:
            total = sum(kg.relatedness(query_id, doc_id, mode=mode) for doc_id in document_ids)
            average = total / len(document_ids)
        else:
            average = 0.0
        breakdown.append((query_id, average))
    return QdrScore(value=sum(avg for _, avg in breakdown), breakdown=tuple(breakdown))


def rerank(
    candidates: Sequence[ScoredDoc],
    query_entities: Sequence[str],
    kg: KnowledgeGraph,
    entities_by_doc: Mapping[str, Sequence[str]],
    mode: str = "complement",
) -> list[RerankedDoc]:
    """Reorder candidates by descending QDR; ties keep embedding order.

    ``entities_by_doc`` is the per-document entity cache built at index
    time. Candidates missing from it are treated as having no entities.
    No candidate is ever added or dropped.
    """
    scored = [
        RerankedDoc(
            doc_id=c.doc_id,
            rank=0,
            embedding_score=c.score,
            embedding_rank=c.rank,
            relatedness=qdr(query_entities, entities_by_doc.get(c.doc_id, ()), kg, mode=mode),
        )
        for c in candidates
    ]
    scored.sort(key=lambda r: -r.relatedness.value)  # stable: ties keep input order
    return [
        RerankedDoc(
            doc_id=r.doc_id,
            rank=position,
            embedding_score=r.embedding_score,
            embedding_rank=r.embedding_rank,
            relatedness=r.relatedness,
        )
        for position, r in enumerate(scored, start=1)
    ]
