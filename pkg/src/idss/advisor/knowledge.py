"""Keyword-overlap retrieval over a directory of short text documents.

Each file starts with a ``tags:`` line, optionally followed by a ``source:``
line (design-doc, research or experience); the rest is the body.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

SOURCES = ("design-doc", "research", "experience")
_TOKEN = re.compile(r"[0-9a-z]+")


def tokens(text: str) -> set[str]:
    return set(_TOKEN.findall(text.casefold()))


@dataclass(frozen=True)
class KnowledgeDoc:
    id: str
    tags: tuple[str, ...]
    body: str
    source: str = "design-doc"

    def terms(self) -> set[str]:
        return tokens(" ".join(self.tags)) | tokens(self.body)


@dataclass(frozen=True)
class KnowledgeStore:
    docs: tuple[KnowledgeDoc, ...] = ()

    def __post_init__(self):
        ids = [d.id for d in self.docs]
        if len(ids) != len(set(ids)):
            raise ValueError("knowledge doc ids must be unique")

    def __len__(self):
        return len(self.docs)


def parse_doc(doc_id: str, text: str) -> KnowledgeDoc:
    lines = text.splitlines()
    if not lines or not lines[0].lower().startswith("tags:"):
        raise ValueError(f"{doc_id}: first line must start with 'tags:'")
    tags = tuple(t.strip() for t in lines[0][5:].split(",") if t.strip())
    rest = lines[1:]
    source = "design-doc"
    if rest and rest[0].lower().startswith("source:"):
        source = rest[0][7:].strip()
        if source not in SOURCES:
            raise ValueError(f"{doc_id}: unknown source {source!r}")
        rest = rest[1:]
    return KnowledgeDoc(doc_id, tags, "\n".join(rest).strip(), source)


def load_knowledge(directory: str | Path | None = None) -> KnowledgeStore:
    """Load ``*.txt`` files; ``None`` loads the bundled starter store."""
    if directory is None:
        root = resources.files("idss") / "data" / "knowledge"
        files = sorted((p for p in root.iterdir() if p.name.endswith(".txt")),
                       key=lambda p: p.name)
    else:
        files = sorted(Path(directory).glob("*.txt"))
    docs = [parse_doc(Path(p.name).stem, p.read_text(encoding="utf-8")) for p in files]
    return KnowledgeStore(tuple(docs))


def retrieve(store: KnowledgeStore, query: str, k: int = 3) -> list[KnowledgeDoc]:
    """Top-k documents by shared-token count, ties broken by id."""
    q = tokens(query)
    scored = sorted(store.docs, key=lambda d: (-len(q & d.terms()), d.id))
    return scored[:max(0, k)]
