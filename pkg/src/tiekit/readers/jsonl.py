"""Canonical JSON-lines interchange: one document per line."""

from __future__ import annotations

import io
import json
from pathlib import Path

from tiekit.model import Dataset, Document, Entity, EntityKind, TLink
from tiekit.relations import PointRelation, RelationError, TemporalRelation

__all__ = ["JsonlError", "document_to_dict", "document_from_dict", "write_jsonl", "read_jsonl", "dumps_dataset"]


class JsonlError(ValueError):
    pass


def _entity_to_dict(ent: Entity) -> dict:
    return {
        "id": ent.id,
        "kind": ent.kind.value,
        "text": ent.text,
        "span": list(ent.span) if ent.span else None,
        "attributes": dict(ent.attributes),
    }


def tlink_to_dict(tl: TLink) -> dict:
    out = {
        "id": tl.id,
        "source": tl.source,
        "target": tl.target,
        "relation": tl.relation.point.to_dict(),
    }
    if tl.attributes:
        out["attributes"] = dict(tl.attributes)
    return out


def document_to_dict(doc: Document, split: str = "train") -> dict:
    return {
        "name": doc.name,
        "text": doc.text,
        "dct": doc.dct.id if doc.dct else None,
        "entities": [_entity_to_dict(e) for e in doc.entities],
        "tlinks": [tlink_to_dict(t) for t in doc.tlinks],
        "split": split,
    }


def tlink_from_dict(obj: dict) -> TLink:
    point = PointRelation.from_dict(obj["relation"])
    return TLink(obj["source"], obj["target"], TemporalRelation(point), obj.get("id"), obj.get("attributes"))


def document_from_dict(obj: dict) -> Document:
    entities = [
        Entity(
            e["id"],
            EntityKind(e["kind"]),
            e.get("text", ""),
            tuple(e["span"]) if e.get("span") else None,
            e.get("attributes") or {},
        )
        for e in obj.get("entities", [])
    ]
    dct = None
    if obj.get("dct") is not None:
        dct = next((e for e in entities if e.id == obj["dct"]), None)
        if dct is None:
            raise JsonlError(f"dct {obj['dct']!r} is not among the entities")
    tlinks = [tlink_from_dict(t) for t in obj.get("tlinks", [])]
    return Document(obj["name"], obj.get("text", ""), dct, entities, tlinks)


def dumps_dataset(ds: Dataset) -> str:
    buf = io.StringIO()
    for split, docs in (("train", ds.train), ("test", ds.test)):
        for doc in docs:
            buf.write(json.dumps(document_to_dict(doc, split), ensure_ascii=False))
            buf.write("\n")
    return buf.getvalue()


def write_jsonl(ds: Dataset, path) -> None:
    Path(path).write_text(dumps_dataset(ds), encoding="utf-8")


def read_jsonl(path, name: str | None = None) -> Dataset:
    path = Path(path)
    train, test = [], []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc = document_from_dict(obj)
            except (json.JSONDecodeError, KeyError, TypeError, RelationError, ValueError) as exc:
                raise JsonlError(f"{path}:{lineno}: {exc}") from exc
            (test if obj.get("split") == "test" else train).append(doc)
    return Dataset(name or path.stem, train, test)
