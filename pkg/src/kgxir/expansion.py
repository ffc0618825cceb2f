"""KG-driven query expansion.

A query is classified by what the linker found in it, then expanded with
the matching slice of the graph:

* entity + relation  -> append the labels of entities reachable over that
  relation from each matched entity (deduplicated, ordered by entity id);
* a single entity    -> append its description tokens (capped);
* several entities, no relation -> append the entity labels themselves;
* no entities        -> leave the query untouched.

Appended terms only ever come from KG labels and descriptions; the original
query text is never altered or reordered.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .kg import KnowledgeGraph
from .linking import ENTITY, RELATION, LinkedMention
from .text import tokenize

# Bounds how much of a long description can drift the query vector.
DESCRIPTION_TOKEN_CAP = 64


class ExpansionCase(Enum):
    """Which expansion rule applied. Values are the wire labels."""

    ENTITY_RELATION = "A"
    SINGLE_ENTITY = "B"
    ENTITIES_ONLY = "C"
    NONE = "none"


@dataclass(frozen=True)
class ExpandedQuery:
    original: str
    appended_terms: tuple[str, ...]
    case: ExpansionCase
    entity_ids: tuple[str, ...]
    relation_ids: tuple[str, ...]

    @property
    def text(self) -> str:
        """Original query plus the appended terms, space-joined."""
        if not self.appended_terms:
            return self.original
        return self.original + " " + " ".join(self.appended_terms)


def _distinct_ids(mentions: Sequence[LinkedMention], kind: str) -> list[str]:
    seen: dict[str, None] = {}
    for m in mentions:
        if m.kind == kind:
            seen.setdefault(m.id)
    return list(seen)


def classify(
    entity_mentions: Sequence[LinkedMention],
    relation_mentions: Sequence[LinkedMention],
) -> ExpansionCase:
    """Pick the expansion case from distinct mentioned ids.

    At least one entity and one relation -> ENTITY_RELATION; exactly one
    entity alone -> SINGLE_ENTITY; several entities without a relation ->
    ENTITIES_ONLY; no entities -> NONE (relations alone expand nothing).
    """
    n_entities = len(_distinct_ids(entity_mentions, ENTITY))
    n_relations = len(_distinct_ids(relation_mentions, RELATION))
    if n_entities == 0:
        return ExpansionCase.NONE
    if n_relations >= 1:
        return ExpansionCase.ENTITY_RELATION
    if n_entities == 1:
        return ExpansionCase.SINGLE_ENTITY
    return ExpansionCase.ENTITIES_ONLY


def expand(
    query: str,
    mentions: Sequence[LinkedMention],
    kg: KnowledgeGraph,
    description_token_cap: int = DESCRIPTION_TOKEN_CAP,
) -> ExpandedQuery:
    """Build the expanded query for ``query`` given its linked mentions."""
    entity_ids = _distinct_ids(mentions, ENTITY)
    relation_ids = _distinct_ids(mentions, RELATION)
    case = classify(
        [m for m in mentions if m.kind == ENTITY],
        [m for m in mentions if m.kind == RELATION],
    )

    appended: list[str] = []
    if case is ExpansionCase.ENTITY_RELATION:
        neighbor_ids: set[str] = set()
        for entity_id in entity_ids:
            for relation_id in relation_ids:
                neighbor_ids.update(kg.neighbors(entity_id, relation_id))
        appended = [kg.entities[nid].label for nid in sorted(neighbor_ids)]
    elif case is ExpansionCase.SINGLE_ENTITY:
        description = kg.entities[entity_ids[0]].description
        appended = tokenize(description)[:description_token_cap]
    elif case is ExpansionCase.ENTITIES_ONLY:
        appended = [kg.entities[eid].label for eid in entity_ids]

    return ExpandedQuery(
        original=query,
        appended_terms=tuple(appended),
        case=case,
        entity_ids=tuple(entity_ids),
        relation_ids=tuple(relation_ids),
    )
