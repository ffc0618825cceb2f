"""On-disk index artifact: embedder model, document vectors, sentence spans,
and cached per-document entities, in one versioned JSON file.

Serialization is canonical (sorted keys, shortest-repr floats, fixed list
orders), so rebuilding from identical inputs produces identical bytes, and
floats survive a save/load round trip bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .retrieval import Document, DocumentIndex
from .text import EmbedderModel, SentenceSpan

FORMAT_NAME = "kgxir-index"
FORMAT_VERSION = 1


def _sparse(vector: np.ndarray) -> list[list[object]]:
    return [[int(i), float(vector[i])] for i in np.nonzero(vector)[0]]


def index_to_payload(index: DocumentIndex) -> dict[str, object]:
    model = index.model
    documents = []
    for doc_id, doc in index.documents.items():
        entities = None
        if index.entities_by_doc is not None:
            entities = list(index.entities_by_doc[doc_id])
        documents.append(
            {
                "id": doc.id,
                "title": doc.title,
                "text": doc.text,
                "sentences": [[s.start, s.end] for s in index.sentences[doc_id]],
                "vector": _sparse(index.vectors[doc_id]),
                "entities": entities,
            }
        )
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "embedder": {
            "n_docs": model.n_docs,
            "vocabulary": list(model.vocabulary),
            "document_frequency": [model.document_frequency[t] for t in model.vocabulary],
        },
        "documents": documents,
    }


def save_index(index: DocumentIndex, path: str | Path) -> None:
    payload = index_to_payload(index)
    text = json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def index_from_payload(payload: dict[str, object], source: str = "<index>") -> DocumentIndex:
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise DataFormatError(f"{source}: not a {FORMAT_NAME} artifact")
    if payload.get("version") != FORMAT_VERSION:
        raise DataFormatError(
            f"{source}: unsupported artifact version {payload.get('version')!r} "
            f"(expected {FORMAT_VERSION})"
        )
    embedder = payload["embedder"]
    vocabulary = list(embedder["vocabulary"])
    model = EmbedderModel(
        vocabulary=vocabulary,
        document_frequency=dict(zip(vocabulary, embedder["document_frequency"])),
        n_docs=embedder["n_docs"],
    )
    documents: dict[str, Document] = {}
    vectors: dict[str, np.ndarray] = {}
    sentences: dict[str, list[SentenceSpan]] = {}
    entities: dict[str, list[str]] | None = None
    for record in payload["documents"]:
        doc = Document(id=record["id"], text=record["text"], title=record.get("title", ""))
        vector = np.zeros(model.dimension, dtype=np.float64)
        for position, weight in record["vector"]:
            vector[position] = weight
        documents[doc.id] = doc
        vectors[doc.id] = vector
        sentences[doc.id] = [
            SentenceSpan(index=i, start=start, end=end)
            for i, (start, end) in enumerate(record["sentences"])
        ]
        if record.get("entities") is not None:
            if entities is None:
                entities = {}
            entities[doc.id] = list(record["entities"])
    return DocumentIndex(
        model=model,
        documents=documents,
        vectors=vectors,
        sentences=sentences,
        entities_by_doc=entities,
    )


def load_index(path: str | Path) -> DocumentIndex:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON ({exc.msg})") from exc
    return index_from_payload(payload, source=str(path))
