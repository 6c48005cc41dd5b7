"""Candidate catalog: in-memory item table plus a line-oriented file format.

File layout (``#`` starts a comment)::

    vocab_size = 16
    item <id> | <display name> | <attr_id>:<value>,... | <12 context floats> | <pop> | <nov>

The attribute field may be ``-`` for an item with no active attributes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .context import CONTEXT_DIM, Candidate
from .errors import InvalidConfig, NotFound


@dataclass
class Catalog:
    vocab_size: int
    items: list[Candidate] = field(default_factory=list)
    _by_id: dict[str, Candidate] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._by_id:
            self._by_id = {c.item_id: c for c in self.items}
        if len(self._by_id) != len(self.items):
            raise InvalidConfig("duplicate item ids in catalog")

    def __len__(self) -> int:
        return len(self.items)

    def get(self, item_id: str) -> Candidate:
        c = self._by_id.get(item_id)
        if c is None:
            raise NotFound(f"unknown item {item_id!r}")
        return c

    def attributes_of(self, item_id: str) -> np.ndarray | None:
        c = self._by_id.get(item_id)
        return c.attributes if c is not None else None

    def name_of(self, item_id: str) -> str:
        c = self._by_id.get(item_id)
        return (c.name or c.item_id) if c is not None else item_id


def _parse_sparse_attrs(fieldtext: str, vocab_size: int) -> np.ndarray:
    vec = np.zeros(vocab_size, dtype=np.float64)
    fieldtext = fieldtext.strip()
    if fieldtext in ("", "-"):
        return vec
    for pair in fieldtext.split(","):
        idx_s, val_s = pair.split(":")
        idx = int(idx_s)
        if not 0 <= idx < vocab_size:
            raise InvalidConfig(f"attribute id {idx} outside vocab size {vocab_size}")
        vec[idx] = float(val_s)
    return vec


def load_catalog(path: str | Path) -> Catalog:
    path = Path(path)
    if not path.exists():
        raise NotFound(f"catalog file not found: {path}")
    vocab_size: int | None = None
    items: list[Candidate] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower().startswith("vocab_size"):
            vocab_size = int(line.split("=", 1)[1])
            continue
        if not line.startswith("item "):
            raise InvalidConfig(f"{path}:{lineno}: unrecognized line {line!r}")
        if vocab_size is None:
            raise InvalidConfig(f"{path}: vocab_size must precede item records")
        body = line[len("item "):]
        parts = [p.strip() for p in body.split("|")]
        if len(parts) != 6:
            raise InvalidConfig(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
        item_id, name, attrs_s, ctx_s, pop_s, nov_s = parts
        ctx = np.array([float(v) for v in ctx_s.split(",")], dtype=np.float64)
        if len(ctx) != CONTEXT_DIM:
            raise InvalidConfig(
                f"{path}:{lineno}: context affinity needs {CONTEXT_DIM} values, got {len(ctx)}"
            )
        items.append(
            Candidate(
                item_id=item_id,
                name=name,
                attributes=_parse_sparse_attrs(attrs_s, vocab_size),
                context_affinity=ctx,
                popularity=float(pop_s),
                novelty=float(nov_s),
            )
        )
    if vocab_size is None:
        raise InvalidConfig(f"{path}: missing vocab_size header")
    return Catalog(vocab_size=vocab_size, items=items)


def save_catalog(catalog: Catalog, path: str | Path) -> None:
    lines = ["# convrec catalog", f"vocab_size = {catalog.vocab_size}"]
    for c in catalog.items:
        active = np.nonzero(c.attributes)[0]
        attrs = ",".join(f"{int(i)}:{float(c.attributes[i])!r}" for i in active) or "-"
        ctx = ",".join(repr(float(v)) for v in c.context_affinity)
        lines.append(
            f"item {c.item_id} | {c.name or c.item_id} | {attrs} | {ctx} "
            f"| {float(c.popularity)!r} | {float(c.novelty)!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
