from __future__ import annotations

from pathlib import Path

import pytest

from tiekit.model import TLink
from tiekit.relations import PointOrder, PointRelation, TemporalRelation

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"


def to_tlinks(links):
    """Oracle-style (source, target, slots) triples as TLinks."""
    out = []
    for i, (s, t, slots) in enumerate(links):
        point = PointRelation(*(PointOrder(o) for o in slots))
        out.append(TLink(s, t, TemporalRelation(point), f"l{i}"))
    return out


def slots_of(tlink, source=None):
    """Point slots of a tlink as plain symbols, seen from ``source``."""
    if source is not None and tlink.source != source:
        tlink = tlink.inverse()
    return tuple(o.value for o in tlink.relation.point)


def closure_map(tlinks):
    """{(a, b): slots} with a < b, the same shape the closure oracle returns."""
    out = {}
    for tl in tlinks:
        a, b = sorted(tl.pair)
        out[(a, b)] = slots_of(tl, a)
    return out


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
