"""Entity and relation linking against the knowledge graph.

Two linkers share one mention type:

* a deterministic gazetteer built from KG labels and aliases, matched by
  greedy left-to-right longest token match (no disambiguation -- surface
  collisions resolve to the lexicographically smallest id, which makes
  linker mistakes reproducible on purpose);
* a gold-annotation linker that replays hand-curated (kind, id) links per
  query, modeling an ideal entity matcher.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import DataFormatError
from .kg import KnowledgeGraph
from .text import tokenize, tokenize_with_spans

ENTITY = "entity"
RELATION = "relation"
_KINDS = (ENTITY, RELATION)


@dataclass(frozen=True)
class LinkedMention:
    """A text span resolved to one KG id.

    Gold-annotation mentions carry no real span and use start == end == 0.
    """

    start: int
    end: int
    surface: str
    kind: str
    id: str


@dataclass
class Gazetteer:
    """Normalized surface form -> id, one table per kind."""

    entity_surfaces: dict[tuple[str, ...], str] = field(default_factory=dict)
    relation_surfaces: dict[tuple[str, ...], str] = field(default_factory=dict)
    max_tokens: int = 0
    diagnostics: list[str] = field(default_factory=list)


def build_gazetteer(kg: KnowledgeGraph) -> Gazetteer:
    """Index every entity/relation label and alias, token-normalized.

    When two ids of the same kind share a surface form the lexicographically
    smaller id wins and a diagnostic is recorded, so ambiguity is
    deterministic (and testable).
    """
    gaz = Gazetteer()

    def insert(table: dict[tuple[str, ...], str], kind: str, surface: str, new_id: str) -> None:
        key = tuple(tokenize(surface))
        if not key:
            return
        existing = table.get(key)
        if existing is None:
            table[key] = new_id
        elif existing != new_id:
            winner = min(existing, new_id)
            loser = max(existing, new_id)
            table[key] = winner
            gaz.diagnostics.append(
                f"{kind} surface {' '.join(key)!r} is ambiguous between "
                f"{winner!r} and {loser!r}; keeping {winner!r}"
            )
        gaz.max_tokens = max(gaz.max_tokens, len(key))

    for entity in kg.entities.values():
        insert(gaz.entity_surfaces, ENTITY, entity.label, entity.id)
        for alias in entity.aliases:
            insert(gaz.entity_surfaces, ENTITY, alias, entity.id)
    for relation in kg.relations.values():
        insert(gaz.relation_surfaces, RELATION, relation.label, relation.id)
        for alias in relation.aliases:
            insert(gaz.relation_surfaces, RELATION, alias, relation.id)
    return gaz


def link(text: str, gazetteer: Gazetteer) -> list[LinkedMention]:
    """Greedy left-to-right longest-match linking over the token sequence.

    Matched tokens are consumed, so mentions never overlap and come back
    sorted by start offset. At equal length an entity match is preferred
    over a relation match.
    """
    tokens = tokenize_with_spans(text)
    mentions: list[LinkedMention] = []
    i = 0
    while i < len(tokens):
        matched = None
        longest = min(gazetteer.max_tokens, len(tokens) - i)
        for length in range(longest, 0, -1):
            key = tuple(tok for tok, _, _ in tokens[i : i + length])
            entity_id = gazetteer.entity_surfaces.get(key)
            if entity_id is not None:
                matched = (ENTITY, entity_id, length)
                break
            relation_id = gazetteer.relation_surfaces.get(key)
            if relation_id is not None:
                matched = (RELATION, relation_id, length)
                break
        if matched is None:
            i += 1
            continue
        kind, matched_id, length = matched
        start = tokens[i][1]
        end = tokens[i + length - 1][2]
        mentions.append(
            LinkedMention(start=start, end=end, surface=text[start:end], kind=kind, id=matched_id)
        )
        i += length
    return mentions


def distinct_entity_ids(text: str, gazetteer: Gazetteer) -> list[str]:
    """Entity ids mentioned in ``text``, deduplicated, in first-occurrence
    order. Relation mentions are ignored."""
    seen: dict[str, None] = {}
    for mention in link(text, gazetteer):
        if mention.kind == ENTITY:
            seen.setdefault(mention.id)
    return list(seen)


@dataclass
class GoldAnnotations:
    """Ground-truth (kind, id) links per query id."""

    links: dict[str, list[tuple[str, str]]]

    def query_ids(self) -> list[str]:
        return list(self.links)


def parse_gold_annotations(
    lines: Iterable[str], kg: KnowledgeGraph, source: str = "<gold-links>"
) -> GoldAnnotations:
    """``query_id<TAB>kind<TAB>kg_id`` per line; ids are checked against the KG."""
    links: dict[str, list[tuple[str, str]]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataFormatError(
                f"{source}:{lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        query_id, kind, kg_id = fields
        if kind not in _KINDS:
            raise DataFormatError(f"{source}:{lineno}: kind must be entity or relation, got {kind!r}")
        if kind == ENTITY and kg_id not in kg.entities:
            raise DataFormatError(f"{source}:{lineno}: unknown entity id {kg_id!r}")
        if kind == RELATION and kg_id not in kg.relations:
            raise DataFormatError(f"{source}:{lineno}: unknown relation id {kg_id!r}")
        links.setdefault(query_id, []).append((kind, kg_id))
    return GoldAnnotations(links=links)


def load_gold_annotations(path: str | Path, kg: KnowledgeGraph) -> GoldAnnotations:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_gold_annotations(fh, kg, source=str(path))


def link_gold(query_id: str, gold: GoldAnnotations, kg: KnowledgeGraph) -> list[LinkedMention]:
    """Replay the annotated links for ``query_id`` as mentions.

    The mentions carry zero-length spans (there is no text evidence); the
    surface is filled with the KG label for readability.
    """
    if query_id not in gold.links:
        raise KeyError(f"no gold annotations for query id {query_id!r}")
    mentions = []
    for kind, kg_id in gold.links[query_id]:
        label = kg.entities[kg_id].label if kind == ENTITY else kg.relations[kg_id].label
        mentions.append(LinkedMention(start=0, end=0, surface=label, kind=kind, id=kg_id))
    return mentions
