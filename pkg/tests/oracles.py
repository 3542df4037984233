"""Brute-force reference implementations, deliberately independent of tiekit.

Orders are plain strings here: "<", ">", "=", or None for undefined.
"""

from __future__ import annotations

import itertools
import random

SLOT_NAMES = ("xs_ys", "xs_ye", "xe_ys", "xe_ye")
SLOT_POINTS = ((0, 2), (0, 3), (1, 2), (1, 3))  # sX=0 eX=1 sY=2 eY=3
FLIP = {"<": ">", ">": "<", "=": "=", None: None}


def weak_orderings(n: int):
    """Every weak ordering of n points, as a rank tuple using ranks 0..k-1."""
    for ranks in itertools.product(range(n), repeat=n):
        used = sorted(set(ranks))
        if used == list(range(len(used))):
            yield ranks


def cmp(a, b) -> str:
    return "<" if a < b else ">" if a > b else "="


def interval_orderings():
    """All endpoint orderings of two intervals (start before end for each)."""
    return [r for r in weak_orderings(4) if r[0] < r[1] and r[2] < r[3]]


def tuple_of(ranks) -> tuple:
    return tuple(cmp(ranks[i], ranks[j]) for i, j in SLOT_POINTS)


def satisfies(ranks, slots) -> bool:
    return all(o is None or cmp(ranks[i], ranks[j]) == o for (i, j), o in zip(SLOT_POINTS, slots))


def saturate_oracle(slots):
    """Slots forced by ``slots`` over every endpoint ordering; None if unsatisfiable."""
    models = [r for r in interval_orderings() if satisfies(r, slots)]
    if not models:
        return None
    out = []
    for i, j in SLOT_POINTS:
        seen = {cmp(r[i], r[j]) for r in models}
        out.append(seen.pop() if len(seen) == 1 else None)
    return tuple(out)


def consistent_full_tuples():
    """Fully defined order tuples realizable by two intervals."""
    found = []
    for combo in itertools.product("<>=", repeat=4):
        if any(satisfies(r, combo) for r in interval_orderings()):
            found.append(combo)
    return found


def realizable_orders(n_points: int, constraints):
    """For each point pair, the orders realized by some satisfying weak ordering.

    ``constraints`` holds (p, q, "<" | "=") requirements. Weak orderings are
    walked implicitly: each one is a sequence of blocks, i.e. a path through
    the sets of points placed so far. Returns None when nothing satisfies.
    """
    full = (1 << n_points) - 1
    preds = [0] * n_points
    eqs = [0] * n_points
    for p, q, o in constraints:
        if o == "<":
            preds[q] |= 1 << p
        elif o == ">":
            preds[p] |= 1 << q
        else:
            eqs[p] |= 1 << q
            eqs[q] |= 1 << p

    def blocks(placed):
        avail = 0
        for x in range(n_points):
            if not placed >> x & 1 and preds[x] & ~placed == 0:
                avail |= 1 << x
        sub = avail
        while sub:
            ok = True
            rest = sub
            while rest:
                low = rest & -rest
                x = low.bit_length() - 1
                if eqs[x] & ~sub:
                    ok = False
                    break
                rest ^= low
            if ok:
                yield sub
            sub = (sub - 1) & avail

    edges: dict[int, list[int]] = {}
    forward = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for s in frontier:
            outs = edges[s] = list(blocks(s))
            for b in outs:
                t = s | b
                if t not in forward:
                    forward.add(t)
                    nxt.append(t)
        frontier = nxt
    if full not in forward:
        return None
    co = {full}
    for s in sorted(forward, key=lambda m: -bin(m).count("1")):
        if s != full and any(s | b in co for b in edges.get(s, ())):
            co.add(s)
    valid = forward & co

    seen = {(p, q): set() for p in range(n_points) for q in range(n_points) if p != q}
    for s in valid:
        inside = [x for x in range(n_points) if s >> x & 1]
        outside = [x for x in range(n_points) if not s >> x & 1]
        for p in inside:
            for q in outside:
                seen[(p, q)].add("<")
                seen[(q, p)].add(">")
        for b in edges.get(s, ()):
            if s | b in valid:
                members = [x for x in range(n_points) if b >> x & 1]
                for p in members:
                    for q in members:
                        if p != q:
                            seen[(p, q)].add("=")
    return seen


def closure_oracle(links):
    """Forced point slots for every entity pair.

    ``links`` is a list of (source, target, slots) with slots a 4-tuple in
    SLOT_NAMES order. Returns {(a, b): slots} for a < b with at least one
    forced slot, or None if the links are unsatisfiable.
    """
    names = sorted({x for s, t, _ in links for x in (s, t)})
    idx = {n: i for i, n in enumerate(names)}
    constraints = [(2 * i, 2 * i + 1, "<") for i in range(len(names))]
    for s, t, slots in links:
        for (ks, kt), o in zip(SLOT_POINTS, slots):
            if o is not None:
                constraints.append((2 * idx[s] + ks, 2 * idx[t] + (kt - 2), o))
    seen = realizable_orders(2 * len(names), constraints)
    if seen is None:
        return None
    out = {}
    for a, b in itertools.combinations(names, 2):
        ia, ib = idx[a], idx[b]
        slots = []
        for ks, kt in SLOT_POINTS:
            orders = seen[(2 * ia + ks, 2 * ib + (kt - 2))]
            slots.append(next(iter(orders)) if len(orders) == 1 else None)
        if any(o is not None for o in slots):
            out[(a, b)] = tuple(slots)
    return out


def entails_oracle(links, query) -> bool:
    """Whether every defined slot of ``query`` (source, target, slots) is forced by ``links``."""
    forced = closure_oracle(links)
    s, t, slots = query
    if s < t:
        known = forced.get((s, t), (None,) * 4)
    else:
        back = forced.get((t, s), (None,) * 4)
        # role swap: (xs_ys, xs_ye, xe_ys, xe_ye) of (t, s) -> of (s, t)
        known = (FLIP[back[0]], FLIP[back[2]], FLIP[back[1]], FLIP[back[3]])
    return all(o is None or o == k for o, k in zip(slots, known))


def random_consistent_links(rng: random.Random, max_entities=5, max_links=7, drop=0.3):
    """Links read off random ground-truth intervals, with some slots blanked out."""
    n = rng.randint(2, max_entities)
    names = [f"e{i}" for i in range(n)]
    truth = {}
    for name in names:
        a, b = sorted(rng.sample(range(8), 2))
        truth[name] = (a, b)
    pairs = list(itertools.combinations(names, 2))
    rng.shuffle(pairs)
    links = []
    for a, b in pairs[: rng.randint(1, min(max_links, len(pairs)))]:
        if rng.random() < 0.5:
            a, b = b, a
        ends = truth[a] + truth[b]
        slots = tuple(None if rng.random() < drop else cmp(ends[i], ends[j]) for i, j in SLOT_POINTS)
        links.append((a, b, slots))
    return links
