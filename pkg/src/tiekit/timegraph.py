"""Point-based temporal reasoning over sets of tlinks.

Each entity contributes two endpoint nodes. Endpoints constrained to be equal
are merged into one class, "after" constraints are flipped into "before", and
the remaining strict constraints form a DAG over the classes. Two endpoints
are ordered iff one class reaches the other, so any pairwise relation can be
read straight off the reachability sets.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from tiekit.model import TLink
from tiekit.relations import (
    IntervalRelation,
    PointOrder,
    PointRelation,
    TemporalRelation,
    saturate_point,
)

__all__ = [
    "Timegraph",
    "ConsistencyReport",
    "InconsistencyError",
    "UnknownEntityError",
    "temporal_closure",
    "temporal_reduction",
    "check_consistency",
    "canonical_tlink",
    "IncrementalTimegraph",
]

log = logging.getLogger(__name__)

B, A, E, U = PointOrder.BEFORE, PointOrder.AFTER, PointOrder.EQUAL, PointOrder.UNDEFINED

# slot index -> (source endpoint, target endpoint); 0 = start, 1 = end
_SLOT_ENDPOINTS = ((0, 0), (0, 1), (1, 0), (1, 1))


class InconsistencyError(ValueError):
    """The tlinks admit no assignment of endpoint times."""

    def __init__(self, witness: Sequence[TLink], message: str | None = None):
        self.witness = tuple(witness)
        if message is None:
            shown = "; ".join(_describe(tl) for tl in self.witness)
            message = f"inconsistent tlinks: {shown}"
        super().__init__(message)


class UnknownEntityError(KeyError):
    pass


def _describe(tl: TLink) -> str:
    ident = f"[{tl.id}] " if tl.id else ""
    return f"{ident}{tl.source} {tl.relation} {tl.target}"


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    conflict: tuple[TLink, ...] | None = None

    def __bool__(self):
        return self.consistent


def _ordered(tlinks: Iterable[TLink]) -> list[TLink]:
    # sets iterate in hash order; sort them so every result is reproducible
    if isinstance(tlinks, (set, frozenset)):
        return sorted(tlinks, key=_link_key)
    return list(tlinks)


def _link_key(tl: TLink):
    return (tl.source, tl.target, tuple(o.value or "" for o in tl.relation.point), tl.id or "")


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


class _Build:
    """Endpoint classes and the strict DAG between them; ``ok`` is False on a conflict."""

    def __init__(self, tlinks: Sequence[TLink], want_reach: bool = True):
        ids: dict[str, int] = {}
        for tl in tlinks:
            for ent in (tl.source, tl.target):
                if ent not in ids:
                    ids[ent] = len(ids)
        self.entity_index = ids
        n = 2 * len(ids)
        uf = _UnionFind(n)
        strict = []  # (u, v, tlink or None)
        for i in range(len(ids)):
            strict.append((2 * i, 2 * i + 1, None))
        for tl in tlinks:
            s, t = ids[tl.source], ids[tl.target]
            for (ks, kt), order in zip(_SLOT_ENDPOINTS, tl.relation.point):
                if order is U:
                    continue
                u, v = 2 * s + ks, 2 * t + kt
                if order is E:
                    uf.union(u, v)
                elif order is B:
                    strict.append((u, v, tl))
                else:
                    strict.append((v, u, tl))
        self.uf = uf
        self.strict = strict
        self.ok = False

        roots = sorted({uf.find(x) for x in range(n)})
        cls = {r: i for i, r in enumerate(roots)}
        node_class = [cls[uf.find(x)] for x in range(n)]
        m = len(roots)
        succ: list[set[int]] = [set() for _ in range(m)]
        for u, v, _ in strict:
            cu, cv = node_class[u], node_class[v]
            if cu == cv:
                return
            succ[cu].add(cv)
        self.node_class = node_class
        self.succ = succ

        indeg = [0] * m
        for outs in succ:
            for v in outs:
                indeg[v] += 1
        order = [c for c in range(m) if indeg[c] == 0]
        for c in order:  # grows while iterating
            for v in succ[c]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    order.append(v)
        if len(order) != m:
            return
        self.topo = order
        self.ok = True
        if want_reach:
            reach = [0] * m
            for c in reversed(order):
                bits = 0
                for v in succ[c]:
                    bits |= reach[v] | (1 << v)
                reach[c] = bits
            self.reach = reach


def _is_consistent(tlinks: Sequence[TLink]) -> bool:
    return _Build(tlinks, want_reach=False).ok


def _find_witness(tlinks: Sequence[TLink]) -> list[TLink]:
    """A small inconsistent subset; irreducible but not necessarily minimum."""
    links = list(tlinks)
    lo, hi = 1, len(links)
    while lo < hi:
        mid = (lo + hi) // 2
        if _is_consistent(links[:mid]):
            lo = mid + 1
        else:
            hi = mid
    core = links[:lo]
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1 :]
        if not _is_consistent(trial):
            core = trial
        else:
            i += 1
    return core


def _order_between(reach, p: int, q: int) -> PointOrder:
    if p == q:
        return E
    if reach[p] >> q & 1:
        return B
    if reach[q] >> p & 1:
        return A
    return U


_RELATIONS: dict[PointRelation, TemporalRelation] = {}


def _relation(point: PointRelation) -> TemporalRelation:
    rel = _RELATIONS.get(point)
    if rel is None:
        rel = _RELATIONS[point] = TemporalRelation._trusted(point)
    return rel


class Timegraph:
    """Reasoner over a fixed set of tlinks.

    Raises :class:`InconsistencyError` (carrying a witness) when the tlinks
    cannot all hold.
    """

    def __init__(self, tlinks: Iterable[TLink] = ()):
        links = _ordered(tlinks)
        build = _Build(links)
        if not build.ok:
            raise InconsistencyError(_find_witness(links))
        self.tlinks = tuple(links)
        self._build = build
        self._index = build.entity_index

    @property
    def entities(self) -> list[str]:
        return list(self._index)

    def __contains__(self, entity: str) -> bool:
        return entity in self._index

    @property
    def classes(self) -> list[frozenset[tuple[str, str]]]:
        """Equality classes of endpoints, as ``(entity, "start"|"end")`` pairs."""
        names = list(self._index)
        groups: dict[int, set] = {}
        for node, c in enumerate(self._build.node_class):
            groups.setdefault(c, set()).add((names[node // 2], ("start", "end")[node % 2]))
        return [frozenset(groups[c]) for c in sorted(groups)]

    @property
    def strict_edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u, outs in enumerate(self._build.succ) for v in outs}

    def class_of(self, entity: str, endpoint: str) -> int:
        return self._build.node_class[2 * self._entity(entity) + (endpoint == "end")]

    def _entity(self, entity: str) -> int:
        try:
            return self._index[entity]
        except KeyError:
            raise UnknownEntityError(entity) from None

    def point_between(self, a: str, b: str) -> PointRelation:
        ia, ib = self._entity(a), self._entity(b)
        nc, reach = self._build.node_class, self._build.reach
        sa, ea, sb, eb = nc[2 * ia], nc[2 * ia + 1], nc[2 * ib], nc[2 * ib + 1]
        return PointRelation(
            _order_between(reach, sa, sb),
            _order_between(reach, sa, eb),
            _order_between(reach, ea, sb),
            _order_between(reach, ea, eb),
        )

    def relation_between(self, a: str, b: str) -> TemporalRelation:
        return _relation(self.point_between(a, b))

    def entails(self, tlink: TLink) -> bool:
        """Whether every defined slot of ``tlink`` is forced by this graph."""
        if tlink.source not in self._index or tlink.target not in self._index:
            return False
        known = self.point_between(tlink.source, tlink.target)
        return all(o is U or o is k for o, k in zip(tlink.relation.point, known))

    def closure(self) -> list[TLink]:
        names = list(self._index)
        nc, reach = self._build.node_class, self._build.reach
        ends = [(nc[2 * i], nc[2 * i + 1]) for i in range(len(names))]
        # entities in different weak components never relate
        comp = _components(self._build.succ)
        out = []
        make = TLink._fast
        table = _ORIENTED
        by_name = sorted(range(len(names)), key=names.__getitem__)
        for pos, i in enumerate(by_name):
            sa, ea = ends[i]
            ra_s, ra_e = reach[sa], reach[ea]
            ci = comp[sa]
            for j in by_name[pos + 1 :]:
                sb, eb = ends[j]
                if comp[sb] != ci:
                    continue
                rb_s, rb_e = reach[sb], reach[eb]
                code = (
                    (2 if sa == sb else 0 if ra_s >> sb & 1 else 1 if rb_s >> sa & 1 else 3) << 6
                    | (2 if sa == eb else 0 if ra_s >> eb & 1 else 1 if rb_e >> sa & 1 else 3) << 4
                    | (2 if ea == sb else 0 if ra_e >> sb & 1 else 1 if rb_s >> ea & 1 else 3) << 2
                    | (2 if ea == eb else 0 if ra_e >> eb & 1 else 1 if rb_e >> ea & 1 else 3)
                )
                flip, rel = table[code]
                if rel is None:
                    continue
                if flip:
                    out.append(make(names[j], names[i], rel))
                else:
                    out.append(make(names[i], names[j], rel))
        return out

    def reduction(self) -> list[TLink]:
        """A minimal link set with the same closure.

        Built from the endpoint classes and their strict order alone, so any
        two link sets with the same closure reduce to the same links.
        """
        build = self._build
        names = list(self._index)
        succ, reach, nc = build.succ, build.reach, build.node_class

        def key(node: int):
            return names[node // 2], node % 2

        members: dict[int, list[int]] = {}
        for node in sorted(range(len(nc)), key=key):
            members.setdefault(nc[node], []).append(node)

        constraints: dict[tuple[int, int], dict[int, PointOrder]] = {}

        def constrain(u: int, v: int, order: PointOrder):
            x, y = u // 2, v // 2
            if names[x] > names[y]:
                x, y, u, v, order = y, x, v, u, order.inverse()
            slot = 2 * (u % 2) + (v % 2)
            constraints.setdefault((x, y), {})[slot] = order

        # chain each equality class in sorted order
        for group in members.values():
            for u, v in zip(group, group[1:]):
                constrain(u, v, E)

        edges = []
        for c, outs in enumerate(succ):
            covered = 0
            for v in outs:
                covered |= reach[v]
            edges.extend((c, v) for v in outs if not covered >> v & 1)
        edges.sort(key=lambda e: (key(members[e[0]][0]), key(members[e[1]][0])))
        for c, v in edges:
            froms, tos = members[c], members[v]
            to_entities = {n // 2 for n in tos}
            if any(n // 2 in to_entities and n % 2 == 0 for n in froms):
                continue  # an implicit start < end already covers it
            pairs = [(u, w) for u in froms for w in tos]
            used = [(u, w) for u, w in pairs if tuple(sorted((u // 2, w // 2), key=names.__getitem__)) in constraints]
            u, w = min(used or pairs, key=lambda p: (key(p[0]), key(p[1])))
            constrain(u, w, B)

        out = []
        for (x, y), slots in sorted(constraints.items(), key=lambda kv: (names[kv[0][0]], names[kv[0][1]])):
            point = saturate_point(PointRelation(*(slots.get(k, U) for k in range(4))))
            out.append(canonical_tlink(names[x], names[y], _relation(point)))
        return out


_EMPTY_POINT = PointRelation()


def _components(succ: list[set[int]]) -> list[int]:
    n = len(succ)
    uf = _UnionFind(n)
    for u, outs in enumerate(succ):
        for v in outs:
            uf.union(u, v)
    return [uf.find(x) for x in range(n)]


_CANONICAL = frozenset(
    {
        IntervalRelation.BEFORE,
        IntervalRelation.MEETS,
        IntervalRelation.OVERLAPS,
        IntervalRelation.STARTS,
        IntervalRelation.DURING,
        IntervalRelation.FINISHES,
        IntervalRelation.EQUAL,
    }
)
_ORDER_RANK = {B: 0, E: 1, U: 2, A: 3}


def _should_flip(point: PointRelation) -> bool:
    rel = TemporalRelation._trusted(point).interval
    if rel is not None:
        return rel not in _CANONICAL
    inv = point.inverse()
    return tuple(_ORDER_RANK[o] for o in inv) < tuple(_ORDER_RANK[o] for o in point)


def _all_saturated_points():
    import itertools

    for combo in itertools.product((B, A, E, U), repeat=4):
        point = PointRelation(*combo)
        try:
            if saturate_point(point) == point:
                yield point
        except ValueError:
            pass


_FLIP = {p: _should_flip(p) for p in _all_saturated_points()}
# closure inner loop encodes a tuple as 4 base-4 digits: before=0 after=1 equal=2 undefined=3
_DIGIT = {B: 0, A: 1, E: 2, U: 3}
_ORIENTED: list[tuple[bool, TemporalRelation | None]] = [(False, None)] * 256
for _p, _flip in _FLIP.items():
    _code = sum(_DIGIT[o] << (6 - 2 * k) for k, o in enumerate(_p))
    _ORIENTED[_code] = (_flip, None if _p == _EMPTY_POINT else _relation(_p.inverse() if _flip else _p))


def canonical_tlink(source: str, target: str, relation: TemporalRelation, id: str | None = None) -> TLink:
    """Orient a link so complete relations fall in the before/meets/overlaps/
    starts/during/finishes/equal family; symmetric cases go by entity id."""
    point = relation.point
    flip = _FLIP[point]
    if not flip and point.inverse() == point and target < source:
        flip = True
    if flip:
        return TLink(target, source, relation.inverse(), id)
    return TLink(source, target, relation, id)


def temporal_closure(tlinks: Iterable[TLink]) -> list[TLink]:
    """Every relation the tlinks entail, one canonically oriented link per entity pair."""
    return Timegraph(tlinks).closure()


def temporal_reduction(tlinks: Iterable[TLink]) -> list[TLink]:
    """A minimal set of links with the same closure as ``tlinks``."""
    return Timegraph(tlinks).reduction()


def check_consistency(tlinks: Iterable[TLink]) -> ConsistencyReport:
    links = _ordered(tlinks)
    if _is_consistent(links):
        return ConsistencyReport(True)
    return ConsistencyReport(False, tuple(_find_witness(links)))


class IncrementalTimegraph:
    """Consistency-checked insertion of tlinks, one at a time.

    Used for greedy repair of inconsistent predictions, where rebuilding the
    full graph after every insertion would be quadratic in builds.
    """

    def __init__(self):
        self._nodes: dict[str, int] = {}
        self._succ: list[set[int]] = []
        self._eq: list[set[int]] = []
        self.tlinks: list[TLink] = []

    def _entity(self, name: str) -> int:
        idx = self._nodes.get(name)
        if idx is None:
            idx = self._nodes[name] = len(self._succ)
            self._succ.extend((set(), set()))
            self._eq.extend((set(), set()))
            self._succ[idx].add(idx + 1)
        return idx

    def _reaches(self, src: int, dst: int, strict: bool) -> bool:
        # search over (node, passed a strict edge yet)
        start = (src, False)
        seen = {start}
        stack = [start]
        while stack:
            node, hot = stack.pop()
            if node == dst and (hot or not strict) and (node, hot) != start:
                return True
            for nxt in self._succ[node]:
                state = (nxt, True)
                if state not in seen:
                    seen.add(state)
                    stack.append(state)
            for nxt in self._eq[node]:
                state = (nxt, hot)
                if state not in seen:
                    seen.add(state)
                    stack.append(state)
        return False

    def add(self, tlink: TLink) -> bool:
        """Insert ``tlink`` if it keeps the graph consistent; report whether it was kept."""
        s, t = self._entity(tlink.source), self._entity(tlink.target)
        undo = []
        for (ks, kt), order in zip(_SLOT_ENDPOINTS, tlink.relation.point):
            if order is U:
                continue
            u, v = s + ks, t + kt
            if order is A:
                u, v, order = v, u, B
            if order is B:
                ok = not self._reaches(v, u, strict=False)
                if ok and v not in self._succ[u]:
                    self._succ[u].add(v)
                    undo.append(("succ", u, v))
            else:
                ok = not (self._reaches(u, v, strict=True) or self._reaches(v, u, strict=True))
                if ok and v not in self._eq[u]:
                    self._eq[u].add(v)
                    self._eq[v].add(u)
                    undo.append(("eq", u, v))
            if not ok:
                for kind, a, b in reversed(undo):
                    if kind == "succ":
                        self._succ[a].discard(b)
                    else:
                        self._eq[a].discard(b)
                        self._eq[b].discard(a)
                return False
        self.tlinks.append(tlink)
        return True
