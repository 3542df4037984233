"""Delimiter-separated tlink files (MATRES / TDDiscourse style)."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from tiekit.model import Dataset, Document, Entity, EntityKind, TLink
from tiekit.relations import RelationConvention, RelationParseError, parse_relation

log = logging.getLogger(__name__)

__all__ = ["TabularSchema", "TabularError", "read_tabular"]

ROLES = ("doc_name", "source_id", "target_id", "relation", "ignore")
_REQUIRED = ("doc_name", "source_id", "target_id", "relation")


class TabularError(ValueError):
    pass


@dataclass(frozen=True)
class TabularSchema:
    columns: tuple[str, ...] = ("doc_name", "source_id", "target_id", "relation")
    delimiter: str = "\t"
    has_header: bool = False

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        unknown = [c for c in self.columns if c not in ROLES]
        if unknown:
            raise TabularError(f"unknown column roles {unknown}; expected {ROLES}")
        for role in _REQUIRED:
            if self.columns.count(role) != 1:
                raise TabularError(f"schema needs exactly one {role!r} column")

    def index(self, role: str) -> int:
        return self.columns.index(role)

    @classmethod
    def from_dict(cls, obj: dict) -> TabularSchema:
        return cls(
            tuple(obj.get("columns", cls.columns)),
            obj.get("delimiter", "\t"),
            bool(obj.get("has_header", False)),
        )


def _guess_kind(entity_id: str) -> EntityKind:
    return EntityKind.TIMEX if entity_id.startswith("t") else EntityKind.EVENT


def _lookup(doc: Document | None, ref: str) -> str | None:
    if doc is None:
        return None
    if ref in doc:
        return ref
    # some tables give bare instance numbers ("12" for "ei12")
    for ent in doc.entities:
        if ent.attributes.get("eiid") in (ref, f"ei{ref}"):
            return ent.id
    return None


def read_tabular(
    path,
    schema: TabularSchema | None = None,
    convention: RelationConvention | str = RelationConvention.TIMEML,
    base: Dataset | None = None,
    name: str | None = None,
) -> Dataset:
    """Read tlinks from a table, grouped into documents by ``doc_name``.

    With ``base``, links replace the tlinks of the matching base documents and
    ids are resolved against their entities (by id, then by event instance id).
    Anything unresolved gets a span-less placeholder entity.
    """
    schema = schema or TabularSchema()
    convention = RelationConvention.from_name(convention)
    path = Path(path)
    width = len(schema.columns)
    cols = {role: schema.index(role) for role in _REQUIRED}

    order: list[str] = []
    rows: dict[str, list[tuple[int, str, str, str]]] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        for rowno, row in enumerate(reader, 1):
            if schema.has_header and rowno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise TabularError(f"{path}: row {rowno} has {len(row)} columns, expected {width}")
            doc_name = row[cols["doc_name"]].strip()
            if doc_name not in rows:
                order.append(doc_name)
                rows[doc_name] = []
            rows[doc_name].append(
                (rowno, row[cols["source_id"]].strip(), row[cols["target_id"]].strip(), row[cols["relation"]].strip())
            )

    base_docs = {d.name: d for d in base.documents} if base else {}
    test_names = {d.name for d in base.test} if base else set()
    train, test = [], []
    for doc_name in order:
        base_doc = base_docs.get(doc_name)
        if base and base_doc is None:
            log.warning("%s: document %s not in base dataset, synthesizing it", path, doc_name)
        entities = list(base_doc.entities) if base_doc else []
        known = {e.id for e in entities}
        tlinks = []
        for rowno, src, tgt, label in rows[doc_name]:
            try:
                relation = parse_relation(label, convention)
            except RelationParseError as exc:
                raise TabularError(f"{path}: row {rowno}: {exc}") from None
            ends = []
            for ref in (src, tgt):
                resolved = _lookup(base_doc, ref) or ref
                if resolved not in known:
                    entities.append(Entity(resolved, _guess_kind(resolved)))
                    known.add(resolved)
                ends.append(resolved)
            tlinks.append(TLink(ends[0], ends[1], relation, f"r{rowno}"))
        if base_doc:
            doc = Document(doc_name, base_doc.text, base_doc.dct, entities, tlinks)
        else:
            doc = Document(doc_name, "", None, entities, tlinks)
        (test if doc_name in test_names else train).append(doc)
    return Dataset(name or path.stem, train, test)
