"""Documents, entities and temporal links, independent of any file format."""

from __future__ import annotations

import enum
import itertools
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

from tiekit.relations import TemporalRelation

__all__ = [
    "EntityKind",
    "Entity",
    "TLink",
    "Document",
    "Dataset",
    "DatasetStats",
    "DocumentError",
    "CREATION_TIME",
    "entity_by_id",
    "dataset_stats",
    "find_duplicate_texts",
]

CREATION_TIME = "CREATION_TIME"


class DocumentError(ValueError):
    pass


class EntityKind(enum.Enum):
    EVENT = "Event"
    TIMEX = "Timex"


_EMPTY: Mapping[str, str] = MappingProxyType({})


def _freeze(mapping: Mapping[str, str] | None) -> Mapping[str, str]:
    if not mapping:
        return _EMPTY
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True)
class Entity:
    id: str
    kind: EntityKind
    text: str = ""
    span: tuple[int, int] | None = None
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise DocumentError("entity id must be non-empty")
        if not isinstance(self.kind, EntityKind):
            object.__setattr__(self, "kind", EntityKind(self.kind))
        if self.span is not None:
            start, end = self.span
            if not 0 <= start < end:
                raise DocumentError(f"entity {self.id}: bad span {self.span}")
            object.__setattr__(self, "span", (int(start), int(end)))
        object.__setattr__(self, "attributes", _freeze(self.attributes))

    def __hash__(self):
        return hash((self.id, self.kind, self.text, self.span, frozenset(self.attributes.items())))

    def __eq__(self, other):
        if not isinstance(other, Entity):
            return NotImplemented
        return (
            self.id == other.id
            and self.kind is other.kind
            and self.text == other.text
            and self.span == other.span
            and dict(self.attributes) == dict(other.attributes)
        )

    @property
    def is_event(self) -> bool:
        return self.kind is EntityKind.EVENT

    @property
    def is_timex(self) -> bool:
        return self.kind is EntityKind.TIMEX

    @property
    def is_dct(self) -> bool:
        return self.attributes.get("functionInDocument") == CREATION_TIME


@dataclass(frozen=True)
class TLink:
    """A directed temporal link ``source -> target``.

    ``attributes`` carries uninterpreted extras from the source file (signal
    ids, syntax, ...) and, like the relation label, does not take part in
    equality.
    """

    source: str
    target: str
    relation: TemporalRelation
    id: str | None = None
    attributes: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.source == self.target:
            raise DocumentError(f"tlink {self.id or ''} links {self.source!r} to itself")
        if not isinstance(self.relation, TemporalRelation):
            object.__setattr__(self, "relation", TemporalRelation(self.relation))
        object.__setattr__(self, "attributes", _freeze(self.attributes))

    def __hash__(self):
        return hash((self.source, self.target, self.relation, self.id))

    @classmethod
    def _fast(cls, source: str, target: str, relation: TemporalRelation) -> TLink:
        # skips validation; for reasoner output built from already-checked links
        obj = object.__new__(cls)
        obj.__dict__.update(source=source, target=target, relation=relation, id=None, attributes=_EMPTY)
        return obj

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.source, self.target))

    def inverse(self) -> TLink:
        return TLink(self.target, self.source, self.relation.inverse(), self.id, self.attributes)

    def oriented(self, source: str) -> TLink:
        """This link with ``source`` on the source side."""
        if source == self.source:
            return self
        if source == self.target:
            return self.inverse()
        raise KeyError(source)


class Document:
    """One annotated text.

    ``entities`` always includes the DCT when there is one. Span offsets are
    half-open and index ``text`` by code point.
    """

    __slots__ = ("name", "text", "dct", "entities", "tlinks", "_index")

    def __init__(
        self,
        name: str,
        text: str = "",
        dct: Entity | None = None,
        entities: Iterable[Entity] = (),
        tlinks: Iterable[TLink] = (),
    ):
        entities = list(entities)
        if dct is not None and dct not in entities:
            entities.insert(0, dct)
        index: dict[str, Entity] = {}
        for ent in entities:
            if ent.id in index:
                raise DocumentError(f"{name}: duplicate entity id {ent.id!r}")
            if ent.span is not None:
                start, end = ent.span
                if end > len(text) or text[start:end] != ent.text:
                    raise DocumentError(
                        f"{name}: span {ent.span} of entity {ent.id!r} does not match its text {ent.text!r}"
                    )
            index[ent.id] = ent
        tlinks = tuple(tlinks)
        for tl in tlinks:
            for end_id in (tl.source, tl.target):
                if end_id not in index:
                    raise DocumentError(f"{name}: tlink {tl.id or ''} references unknown entity {end_id!r}")
        set_ = object.__setattr__
        set_(self, "name", name)
        set_(self, "text", text)
        set_(self, "dct", dct)
        set_(self, "entities", tuple(entities))
        set_(self, "tlinks", tlinks)
        set_(self, "_index", index)

    def __setattr__(self, key, value):
        raise AttributeError("Document is immutable")

    def __eq__(self, other):
        if not isinstance(other, Document):
            return NotImplemented
        return (
            self.name == other.name
            and self.text == other.text
            and self.dct == other.dct
            and set(self.entities) == set(other.entities)
            and set(self.tlinks) == set(other.tlinks)
        )

    __hash__ = None

    def __repr__(self):
        return f"Document({self.name!r}, entities={len(self.entities)}, tlinks={len(self.tlinks)})"

    def __getitem__(self, entity_id: str) -> Entity:
        return self._index[entity_id]

    def __contains__(self, entity_id) -> bool:
        return entity_id in self._index

    def entity(self, entity_id: str) -> Entity | None:
        return self._index.get(entity_id)

    @property
    def events(self) -> list[Entity]:
        return [e for e in self.entities if e.is_event]

    @property
    def timexs(self) -> list[Entity]:
        return [e for e in self.entities if e.is_timex]

    def replace(self, **changes) -> Document:
        fields = {k: getattr(self, k) for k in ("name", "text", "dct", "entities", "tlinks")}
        fields.update(changes)
        return Document(**fields)

    def closure(self) -> list[TLink]:
        from tiekit.timegraph import temporal_closure

        return temporal_closure(self.tlinks)


def entity_by_id(doc: Document, entity_id: str) -> Entity | None:
    return doc.entity(entity_id)


@dataclass(frozen=True)
class Dataset:
    name: str
    train: tuple[Document, ...] = ()
    test: tuple[Document, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "train", tuple(self.train))
        object.__setattr__(self, "test", tuple(self.test))
        seen = set()
        for doc in self.documents:
            if doc.name in seen:
                raise DocumentError(f"dataset {self.name}: duplicate document name {doc.name!r}")
            seen.add(doc.name)

    @property
    def documents(self) -> tuple[Document, ...]:
        return self.train + self.test

    def __getitem__(self, name: str) -> Document:
        for doc in self.documents:
            if doc.name == name:
                return doc
        raise KeyError(name)

    def __iter__(self):
        return iter(self.documents)

    def __len__(self):
        return len(self.train) + len(self.test)

    def split_of(self, name: str) -> str:
        if any(d.name == name for d in self.test):
            return "test"
        return "train"


@dataclass(frozen=True)
class DatasetStats:
    docs: int = 0
    events: int = 0
    timexs: int = 0
    tlinks: int = 0

    def __add__(self, other: DatasetStats) -> DatasetStats:
        return DatasetStats(
            self.docs + other.docs,
            self.events + other.events,
            self.timexs + other.timexs,
            self.tlinks + other.tlinks,
        )

    @classmethod
    def of(cls, documents: Iterable[Document]) -> DatasetStats:
        total = cls()
        for doc in documents:
            total += cls(1, len(doc.events), len(doc.timexs), len(doc.tlinks))
        return total

    def as_dict(self) -> dict[str, int]:
        return {"docs": self.docs, "events": self.events, "timexs": self.timexs, "tlinks": self.tlinks}


def dataset_stats(ds: Dataset | Iterable[Document]) -> DatasetStats:
    documents = ds.documents if isinstance(ds, Dataset) else ds
    return DatasetStats.of(documents)


_WS = re.compile(r"\s+")


def find_duplicate_texts(ds: Dataset | Iterable[Document]) -> list[tuple[str, str]]:
    """Pairs of documents whose text is identical up to whitespace."""
    documents = ds.documents if isinstance(ds, Dataset) else list(ds)
    groups: dict[str, list[str]] = {}
    for doc in documents:
        key = _WS.sub(" ", doc.text).strip()
        if not key:
            continue
        groups.setdefault(key, []).append(doc.name)
    pairs = []
    for names in groups.values():
        pairs.extend(itertools.combinations(names, 2))
    return pairs
