"""TimeML (1.2.1) document reader."""

from __future__ import annotations

import abc
import logging
import xml.etree.ElementTree as ET
from pathlib import Path

from tiekit.model import CREATION_TIME, Document, Entity, EntityKind, TLink
from tiekit.relations import RelationConvention, RelationParseError, parse_relation

log = logging.getLogger(__name__)

__all__ = ["BaseDocumentReader", "TimeMLDocumentReader", "TimeMLError", "read_timeml"]


class TimeMLError(ValueError):
    pass


class BaseDocumentReader(abc.ABC):
    """A reader exposes the five parts of a :class:`Document`; :meth:`read` assembles them."""

    def __init__(self, path):
        self.path = Path(path)

    @property
    @abc.abstractmethod
    def name(self) -> str: ...

    @property
    @abc.abstractmethod
    def text(self) -> str: ...

    @property
    @abc.abstractmethod
    def dct(self) -> Entity | None: ...

    @property
    @abc.abstractmethod
    def entities(self) -> list[Entity]: ...

    @property
    @abc.abstractmethod
    def tlinks(self) -> list[TLink]: ...

    def read(self) -> Document:
        return Document(self.name, self.text, self.dct, self.entities, self.tlinks)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _nl(s: str | None) -> str:
    if not s:
        return ""
    return s.replace("\r\n", "\n").replace("\r", "\n")


_INSTANCE_SKIP = {"eiid", "eventID"}
_TLINK_ENDPOINT_ATTRS = {
    "lid", "relType", "eventInstanceID", "timeID", "relatedToEventInstance", "relatedToTime",
}


class TimeMLDocumentReader(BaseDocumentReader):
    """Parses one TimeML file.

    The document text is the character data of the ``TEXT`` element (or of the
    root when there is none). TLINKs whose endpoints cannot be resolved are
    skipped and listed in :attr:`skipped`.
    """

    convention = RelationConvention.TIMEML

    def __init__(self, path):
        super().__init__(path)
        try:
            self.xml = ET.parse(self.path).getroot()
        except ET.ParseError as exc:
            line, col = exc.position
            raise TimeMLError(f"{self.path}:{line}:{col}: malformed XML ({exc.msg})") from exc
        self.skipped: list[str] = []
        self._parse()

    @property
    def name(self) -> str:
        return self.path.stem

    @property
    def text(self) -> str:
        return self._text

    @property
    def dct(self) -> Entity | None:
        return self._dct

    @property
    def entities(self) -> list[Entity]:
        return self._entities

    @property
    def tlinks(self) -> list[TLink]:
        return self._tlinks

    def _parse(self):
        root = self.xml
        region = next((el for el in root.iter() if _local(el.tag) == "TEXT"), root)
        pieces: list[str] = []
        spans: dict[int, tuple[int, int]] = {}

        def walk(elem, offset: int) -> int:
            head = _nl(elem.text)
            pieces.append(head)
            offset += len(head)
            for child in elem:
                start = offset
                offset = walk(child, offset)
                spans[id(child)] = (start, offset)
                tail = _nl(child.tail)
                pieces.append(tail)
                offset += len(tail)
            return offset

        walk(region, 0)
        self._text = text = "".join(pieces)

        entities: list[Entity] = []
        dct = None
        for elem in root.iter():
            tag = _local(elem.tag)
            if tag not in ("EVENT", "TIMEX3"):
                continue
            attrs = dict(elem.attrib)
            ident = attrs.pop("eid" if tag == "EVENT" else "tid", None)
            if not ident:
                raise TimeMLError(f"{self.path}: {tag} element without id")
            span = spans.get(id(elem))
            if span is not None and span[0] == span[1]:
                span = None
            surface = text[span[0] : span[1]] if span else _nl("".join(elem.itertext()))
            kind = EntityKind.EVENT if tag == "EVENT" else EntityKind.TIMEX
            entities.append(Entity(ident, kind, surface, span, attrs))
            if dct is None and kind is EntityKind.TIMEX and attrs.get("functionInDocument") == CREATION_TIME:
                dct = entities[-1]
        if dct is None:
            raise TimeMLError(f"{self.path}: no TIMEX3 with functionInDocument={CREATION_TIME}")

        by_id = {e.id: i for i, e in enumerate(entities)}
        instance_of: dict[str, str] = {}
        for elem in root.iter():
            if _local(elem.tag) != "MAKEINSTANCE":
                continue
            eiid, eid = elem.get("eiid"), elem.get("eventID")
            if not eiid or eid not in by_id:
                log.warning("%s: MAKEINSTANCE %s refers to unknown event %s", self.path, eiid, eid)
                continue
            instance_of[eiid] = eid
            pos = by_id[eid]
            event = entities[pos]
            if "eiid" in event.attributes:
                log.warning("%s: event %s has several instances, keeping %s", self.path, eid, event.attributes["eiid"])
                continue
            attrs = dict(event.attributes)
            attrs["eiid"] = eiid
            attrs.update((k, v) for k, v in elem.attrib.items() if k not in _INSTANCE_SKIP)
            entities[pos] = Entity(event.id, event.kind, event.text, event.span, attrs)
            if event is dct:
                dct = entities[pos]

        def resolve(ref: str | None) -> str | None:
            if ref is None:
                return None
            if ref in instance_of:
                return instance_of[ref]
            return ref if ref in by_id else None

        tlinks = []
        for elem in root.iter():
            if _local(elem.tag) != "TLINK":
                continue
            lid = elem.get("lid")
            raw_src = elem.get("eventInstanceID") or elem.get("timeID")
            raw_tgt = elem.get("relatedToEventInstance") or elem.get("relatedToTime")
            src, tgt = resolve(raw_src), resolve(raw_tgt)
            if src is None or tgt is None:
                log.warning("%s: skipping TLINK %s, unknown endpoint %s -> %s", self.path, lid, raw_src, raw_tgt)
                self.skipped.append(lid or "?")
                continue
            if src == tgt:
                log.warning("%s: skipping TLINK %s, links %s to itself", self.path, lid, src)
                self.skipped.append(lid or "?")
                continue
            label = elem.get("relType")
            if not label:
                raise TimeMLError(f"{self.path}: TLINK {lid} has no relType")
            try:
                relation = parse_relation(label, self.convention)
            except RelationParseError as exc:
                raise TimeMLError(f"{self.path}: TLINK {lid}: {exc}") from None
            extra = {k: v for k, v in elem.attrib.items() if k not in _TLINK_ENDPOINT_ATTRS}
            tlinks.append(TLink(src, tgt, relation, lid, extra))

        self._entities = entities
        self._dct = dct
        self._tlinks = tlinks


def read_timeml(path) -> Document:
    return TimeMLDocumentReader(path).read()
