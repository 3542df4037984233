"""Corrective edits applied to parsed documents.

A patch file maps document names to lists of edits::

    {"apw_b": [{"op": "drop_document"}],
     "wsj_0026": [{"op": "drop_tlink", "id": "l12"},
                  {"op": "set_relation", "id": "l3", "relation": "BEFORE"},
                  {"op": "drop_entity", "id": "e7"}]}

``drop_entity`` also drops every tlink touching the entity.
"""

from __future__ import annotations

import json
from pathlib import Path

from tiekit.model import Dataset, Document, TLink
from tiekit.relations import RelationConvention, parse_relation

__all__ = ["PatchError", "load_patches", "apply_patches"]


class PatchError(ValueError):
    pass


def load_patches(path) -> dict[str, list[dict]]:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PatchError(f"cannot read patch file {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise PatchError(f"{path}: expected an object keyed by document name")
    return obj


def _patch_document(doc: Document, edits: list[dict], convention) -> Document | None:
    entities = list(doc.entities)
    tlinks = list(doc.tlinks)
    dct = doc.dct
    for edit in edits:
        op = edit.get("op")
        if op == "drop_document":
            return None
        if op == "drop_tlink":
            before = len(tlinks)
            tlinks = [t for t in tlinks if t.id != edit["id"]]
            if len(tlinks) == before:
                raise PatchError(f"{doc.name}: no tlink {edit['id']!r} to drop")
        elif op == "set_relation":
            relation = parse_relation(edit["relation"], edit.get("convention", convention))
            hits = [i for i, t in enumerate(tlinks) if t.id == edit["id"]]
            if not hits:
                raise PatchError(f"{doc.name}: no tlink {edit['id']!r} to relabel")
            for i in hits:
                t = tlinks[i]
                tlinks[i] = TLink(t.source, t.target, relation, t.id, t.attributes)
        elif op == "drop_entity":
            ident = edit["id"]
            if dct is not None and dct.id == ident:
                raise PatchError(f"{doc.name}: cannot drop the DCT")
            entities = [e for e in entities if e.id != ident]
            tlinks = [t for t in tlinks if ident not in (t.source, t.target)]
        else:
            raise PatchError(f"{doc.name}: unknown patch op {op!r}")
    return Document(doc.name, doc.text, dct, entities, tlinks)


def apply_patches(ds: Dataset, patches: dict[str, list[dict]], convention=RelationConvention.TIMEML) -> Dataset:
    def patched(docs):
        out = []
        for doc in docs:
            edits = patches.get(doc.name)
            new = _patch_document(doc, edits, convention) if edits else doc
            if new is not None:
                out.append(new)
        return out

    return Dataset(ds.name, patched(ds.train), patched(ds.test))
