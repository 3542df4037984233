"""Temporal relations in point form.

Every relation between a source interval X and a target interval Y is stored
as four point orders between their endpoints::

    xs_ys  start(X) vs start(Y)
    xs_ye  start(X) vs end(Y)
    xe_ys  end(X)   vs start(Y)
    xe_ye  end(X)   vs end(Y)

A slot may be undefined, which is how vague relations (``BEFORE-OR-OVERLAP``,
start-point-only annotations, ...) are represented. Stored relations are always
saturated: every slot entailed by the defined ones and by ``start < end`` is
filled in.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Mapping
from typing import NamedTuple

__all__ = [
    "PointOrder",
    "PointRelation",
    "IntervalRelation",
    "TemporalRelation",
    "RelationConvention",
    "RelationError",
    "InconsistentRelationError",
    "RelationParseError",
    "SLOTS",
    "interval_to_point",
    "point_to_interval",
    "saturate_point",
    "invert",
    "parse_relation",
    "enumerate_complete_relations",
]


class RelationError(ValueError):
    pass


class InconsistentRelationError(RelationError):
    """The point orders cannot all hold at once."""


class RelationParseError(RelationError):
    pass


class PointOrder(enum.Enum):
    BEFORE = "<"
    AFTER = ">"
    EQUAL = "="
    UNDEFINED = None

    @property
    def symbol(self) -> str | None:
        return self.value

    def inverse(self) -> PointOrder:
        return _INVERSE_ORDER[self]

    @classmethod
    def from_symbol(cls, symbol) -> PointOrder:
        if isinstance(symbol, PointOrder):
            return symbol
        try:
            return _SYMBOLS[symbol.lower() if isinstance(symbol, str) else symbol]
        except (KeyError, AttributeError):
            raise RelationParseError(f"unknown point order {symbol!r}") from None


B, A, E, U = PointOrder.BEFORE, PointOrder.AFTER, PointOrder.EQUAL, PointOrder.UNDEFINED

_INVERSE_ORDER = {B: A, A: B, E: E, U: U}
_SYMBOLS = {
    "<": B, "before": B, "b": B,
    ">": A, "after": A, "a": A,
    "=": E, "equal": E, "e": E,
    None: U, "none": U, "": U, "?": U,
}

SLOTS = ("xs_ys", "xs_ye", "xe_ys", "xe_ye")


class PointRelation(NamedTuple):
    xs_ys: PointOrder = U
    xs_ye: PointOrder = U
    xe_ys: PointOrder = U
    xe_ye: PointOrder = U

    @property
    def is_complete(self) -> bool:
        return U not in self

    @property
    def is_empty(self) -> bool:
        return all(o is U for o in self)

    def inverse(self) -> PointRelation:
        """The same constraints seen from the target's side."""
        return PointRelation(
            self.xs_ys.inverse(),
            self.xe_ys.inverse(),
            self.xs_ye.inverse(),
            self.xe_ye.inverse(),
        )

    def to_dict(self) -> dict[str, str | None]:
        return {slot: order.value for slot, order in zip(SLOTS, self)}

    @classmethod
    def from_dict(cls, mapping: Mapping) -> PointRelation:
        unknown = set(mapping) - set(SLOTS)
        if unknown:
            raise RelationParseError(f"unknown point slots {sorted(unknown)}")
        return cls(*(PointOrder.from_symbol(mapping.get(slot)) for slot in SLOTS))

    def __str__(self) -> str:
        return "(" + ", ".join(o.value or "?" for o in self) + ")"


class IntervalRelation(enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    MEETS = "meets"
    MET_BY = "met_by"
    OVERLAPS = "overlaps"
    OVERLAPPED_BY = "overlapped_by"
    STARTS = "starts"
    STARTED_BY = "started_by"
    FINISHES = "finishes"
    FINISHED_BY = "finished_by"
    DURING = "during"
    CONTAINS = "contains"
    EQUAL = "equal"

    @property
    def point(self) -> PointRelation:
        return _INTERVAL_POINTS[self]

    def inverse(self) -> IntervalRelation:
        return _POINT_INTERVALS[self.point.inverse()]


_INTERVAL_POINTS = {
    IntervalRelation.BEFORE: PointRelation(B, B, B, B),
    IntervalRelation.AFTER: PointRelation(A, A, A, A),
    IntervalRelation.MEETS: PointRelation(B, B, E, B),
    IntervalRelation.MET_BY: PointRelation(A, E, A, A),
    IntervalRelation.OVERLAPS: PointRelation(B, B, A, B),
    IntervalRelation.OVERLAPPED_BY: PointRelation(A, B, A, A),
    IntervalRelation.STARTS: PointRelation(E, B, A, B),
    IntervalRelation.STARTED_BY: PointRelation(E, B, A, A),
    IntervalRelation.FINISHES: PointRelation(A, B, A, E),
    IntervalRelation.FINISHED_BY: PointRelation(B, B, A, E),
    IntervalRelation.DURING: PointRelation(A, B, A, B),
    IntervalRelation.CONTAINS: PointRelation(B, B, A, A),
    IntervalRelation.EQUAL: PointRelation(E, B, A, E),
}
_POINT_INTERVALS = {point: rel for rel, point in _INTERVAL_POINTS.items()}


# Endpoint indices: 0=start(X) 1=end(X) 2=start(Y) 3=end(Y).
_SLOT_PAIRS = ((0, 2), (0, 3), (1, 2), (1, 3))

_COMPOSE = {
    (B, B): B, (B, E): B, (E, B): B,
    (A, A): A, (A, E): A, (E, A): A,
    (E, E): E,
}


def _saturate(point: PointRelation) -> PointRelation:
    m = [[U] * 4 for _ in range(4)]
    for i in range(4):
        m[i][i] = E
    m[0][1], m[1][0] = B, A
    m[2][3], m[3][2] = B, A
    for (i, j), order in zip(_SLOT_PAIRS, point):
        if order is U:
            continue
        m[i][j], m[j][i] = order, order.inverse()

    changed = True
    while changed:
        changed = False
        for k in range(4):
            for i in range(4):
                ik = m[i][k]
                if ik is U:
                    continue
                for j in range(4):
                    derived = _COMPOSE.get((ik, m[k][j]))
                    if derived is None:
                        continue
                    current = m[i][j]
                    if current is U:
                        m[i][j], m[j][i] = derived, derived.inverse()
                        changed = True
                    elif current is not derived:
                        raise InconsistentRelationError(f"inconsistent point relation {point}")
    return PointRelation(*(m[i][j] for i, j in _SLOT_PAIRS))


_SATURATED: dict[PointRelation, PointRelation | InconsistentRelationError] = {}


def saturate_point(point: PointRelation) -> PointRelation:
    """Fill in every slot entailed by ``point`` and the implicit ``start < end``.

    Raises :class:`InconsistentRelationError` if the slots contradict each other.
    """
    try:
        result = _SATURATED[point]
    except KeyError:
        try:
            result = _saturate(point)
        except InconsistentRelationError as exc:
            result = exc
        # at most 3**4 distinct tuples, so caching is bounded
        _SATURATED[point] = result
    if isinstance(result, InconsistentRelationError):
        raise InconsistentRelationError(*result.args)
    return result


def interval_to_point(relation: IntervalRelation) -> PointRelation:
    return relation.point


def point_to_interval(point: PointRelation) -> IntervalRelation | None:
    """The Allen relation ``point`` pins down, or None if it stays vague."""
    return _POINT_INTERVALS.get(saturate_point(point))


def enumerate_complete_relations() -> list[tuple[IntervalRelation, PointRelation]]:
    return [(rel, rel.point) for rel in IntervalRelation]


class TemporalRelation:
    """A saturated point relation plus the label it was read from.

    Accepts anything :func:`parse_relation` understands in its default
    conventions: an :class:`IntervalRelation`, a :class:`PointRelation`, an
    interval name such as ``"before"`` or a slot mapping such as
    ``{"xe_ys": "<"}``. Equality ignores the label.
    """

    __slots__ = ("_point", "_label")

    def __init__(self, relation, label: str | None = None):
        if isinstance(relation, TemporalRelation):
            point, label = relation.point, label or relation.label
        elif isinstance(relation, IntervalRelation):
            point = relation.point
        elif isinstance(relation, PointRelation):
            point = saturate_point(relation)
        elif isinstance(relation, Mapping):
            point = saturate_point(PointRelation.from_dict(relation))
        elif isinstance(relation, str):
            point = parse_relation(relation, RelationConvention.INTERVAL).point
            label = label or relation
        else:
            raise TypeError(f"cannot build a temporal relation from {type(relation).__name__}")
        self._point = point
        self._label = label

    @classmethod
    def _trusted(cls, point: PointRelation, label: str | None = None) -> TemporalRelation:
        # caller guarantees ``point`` is already saturated
        obj = cls.__new__(cls)
        obj._point = point
        obj._label = label
        return obj

    @property
    def point(self) -> PointRelation:
        return self._point

    @property
    def label(self) -> str | None:
        return self._label

    @property
    def interval(self) -> IntervalRelation | None:
        return _POINT_INTERVALS.get(self._point)

    @property
    def is_complete(self) -> bool:
        return self._point.is_complete

    def inverse(self) -> TemporalRelation:
        return TemporalRelation._trusted(self._point.inverse())

    def __invert__(self) -> TemporalRelation:
        return self.inverse()

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemporalRelation):
            return NotImplemented
        return self._point == other._point

    def __hash__(self) -> int:
        return hash(self._point)

    def __repr__(self) -> str:
        interval = self.interval
        shown = interval.name if interval else str(self._point)
        return f"TemporalRelation({shown})"

    def __str__(self) -> str:
        interval = self.interval
        return interval.name if interval else str(self._point)


def invert(relation: TemporalRelation) -> TemporalRelation:
    return relation.inverse()


class RelationConvention(enum.Enum):
    TIMEML = "TimeML"
    INTERVAL = "Interval"
    POINT_MAP = "PointMap"
    MATRES_START_POINT = "MatresStartPoint"

    @classmethod
    def from_name(cls, name: str | RelationConvention) -> RelationConvention:
        if isinstance(name, RelationConvention):
            return name
        key = _normalize(name)
        for conv in cls:
            if key in (_normalize(conv.value), _normalize(conv.name)):
                return conv
        if key == "matres":
            return cls.MATRES_START_POINT
        known = ", ".join(c.value for c in cls)
        raise RelationParseError(f"unknown relation convention {name!r} (known: {known})")


def _normalize(label: str) -> str:
    return "".join(ch for ch in label.lower() if ch not in "-_ ")


_INTERVAL_LABELS = {_normalize(rel.value): rel.point for rel in IntervalRelation}

_TIMEML_LABELS = {
    "before": IntervalRelation.BEFORE.point,
    "after": IntervalRelation.AFTER.point,
    "ibefore": IntervalRelation.MEETS.point,
    "iafter": IntervalRelation.MET_BY.point,
    "includes": IntervalRelation.CONTAINS.point,
    "isincluded": IntervalRelation.DURING.point,
    "during": IntervalRelation.DURING.point,
    "duringinv": IntervalRelation.CONTAINS.point,
    "simultaneous": IntervalRelation.EQUAL.point,
    "identity": IntervalRelation.EQUAL.point,
    "begins": IntervalRelation.STARTS.point,
    "begunby": IntervalRelation.STARTED_BY.point,
    "ends": IntervalRelation.FINISHES.point,
    "endedby": IntervalRelation.FINISHED_BY.point,
    # TempEval-2 / TimeBank-Dense vague labels
    "overlap": saturate_point(PointRelation(U, B, A, U)),
    "beforeoroverlap": saturate_point(PointRelation(B, B, U, B)),
    "overlaporafter": saturate_point(PointRelation(A, U, A, A)),
    "vague": PointRelation(),
}

_MATRES_LABELS = {
    "before": saturate_point(PointRelation(xs_ys=B)),
    "after": saturate_point(PointRelation(xs_ys=A)),
    "equal": saturate_point(PointRelation(xs_ys=E)),
    "vague": PointRelation(),
}


def parse_relation(label, convention: RelationConvention | str = RelationConvention.TIMEML) -> TemporalRelation:
    """Normalize a corpus relation label into a :class:`TemporalRelation`.

    Labels are matched case-insensitively, ignoring hyphens and underscores.
    Under ``PointMap`` the label is a slot mapping, or its JSON encoding.
    """
    convention = RelationConvention.from_name(convention)
    if convention is RelationConvention.POINT_MAP:
        mapping = label
        if isinstance(label, str):
            try:
                mapping = json.loads(label)
            except json.JSONDecodeError:
                raise RelationParseError(f"unknown PointMap relation {label!r}") from None
        if not isinstance(mapping, Mapping) or not mapping:
            raise RelationParseError(f"unknown PointMap relation {label!r}")
        text = label if isinstance(label, str) else json.dumps(dict(label), sort_keys=True)
        return TemporalRelation(saturate_point(PointRelation.from_dict(mapping)), label=text)

    if not isinstance(label, str) or not label.strip():
        raise RelationParseError(f"empty or non-string {convention.value} relation label {label!r}")
    table = {
        RelationConvention.TIMEML: _TIMEML_LABELS,
        RelationConvention.INTERVAL: _INTERVAL_LABELS,
        RelationConvention.MATRES_START_POINT: _MATRES_LABELS,
    }[convention]
    try:
        point = table[_normalize(label)]
    except KeyError:
        raise RelationParseError(f"unknown {convention.value} relation label {label!r}") from None
    return TemporalRelation._trusted(point, label=label)
