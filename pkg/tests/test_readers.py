import hashlib
import json
import shutil
import zipfile
from pathlib import Path

import pytest

from tiekit.model import Dataset, Document, Entity, EntityKind, TLink, dataset_stats
from tiekit.readers import (
    MARKER,
    DataMissingError,
    FetchError,
    JsonlError,
    Registry,
    TabularError,
    TabularSchema,
    TimeMLDocumentReader,
    TimeMLError,
    UnknownCorpusError,
    fetch,
    is_fetched,
    read_dataset,
    read_jsonl,
    read_path,
    read_tabular,
    read_timeml,
    write_jsonl,
)
from tiekit.readers.jsonl import document_to_dict
from tiekit.readers.patches import PatchError, apply_patches, load_patches
from tiekit.relations import IntervalRelation, PointOrder, PointRelation, TemporalRelation

B, A, E, U = PointOrder.BEFORE, PointOrder.AFTER, PointOrder.EQUAL, PointOrder.UNDEFINED
BUNDLED_ZIP = Path(__file__).parents[1] / "src" / "tiekit" / "data" / "fixture_corpus.zip"
TIMEML_FIXTURES = ["wsj_demo.tml", "apw_a.tml", "apw_b.tml"]


# -- TimeML --------------------------------------------------------------------


def test_event_transcription(corpus_dir):
    doc = read_timeml(corpus_dir / "wsj_demo.tml")
    went = doc["e1"]
    assert (went.kind, went.text) == (EntityKind.EVENT, "went")
    assert went.attributes["class"] == "OCCURRENCE"
    assert went.attributes["eiid"] == "ei1" and went.attributes["tense"] == "PAST"
    assert doc.text[went.span[0]:went.span[1]] == "went"
    assert doc.text.startswith("\nWe went to dinner")


def test_instance_ids_resolve_to_events(corpus_dir):
    doc = read_timeml(corpus_dir / "wsj_demo.tml")
    links = {t.id: t for t in doc.tlinks}
    assert (links["l3"].source, links["l3"].target) == ("e1", "t0")
    assert links["l3"].relation == TemporalRelation(IntervalRelation.BEFORE)
    assert links["l6"].attributes == {"origin": "USER"}


def test_dct_and_timexes(corpus_dir):
    doc = read_timeml(corpus_dir / "wsj_demo.tml")
    assert doc.dct.id == "t0" and doc.dct.is_dct
    assert doc.dct.span is None  # outside the TEXT element
    assert doc["t1"].attributes["value"] == "1998-02-26"
    assert doc.name == "wsj_demo"


@pytest.mark.parametrize(
    "name, events, timexs, tlinks",
    [("wsj_demo.tml", 6, 3, 8), ("apw_a.tml", 4, 2, 5), ("apw_b.tml", 3, 2, 3)],
)
def test_fixture_counts(corpus_dir, name, events, timexs, tlinks):
    doc = read_timeml(corpus_dir / name)
    assert (len(doc.events), len(doc.timexs), len(doc.tlinks)) == (events, timexs, tlinks)


@pytest.mark.parametrize("name", TIMEML_FIXTURES)
def test_span_fidelity(corpus_dir, name):
    doc = read_timeml(corpus_dir / name)
    spanned = [e for e in doc.entities if e.span]
    assert spanned
    for ent in spanned:
        assert doc.text[ent.span[0]:ent.span[1]] == ent.text


@pytest.mark.parametrize("name", TIMEML_FIXTURES)
def test_reader_is_deterministic(corpus_dir, name):
    assert read_timeml(corpus_dir / name) == read_timeml(corpus_dir / name)


def test_line_endings_normalized(tmp_path, corpus_dir):
    raw = (corpus_dir / "wsj_demo.tml").read_bytes().replace(b"\n", b"\r\n")
    crlf = tmp_path / "wsj_demo.tml"
    crlf.write_bytes(raw)
    assert read_timeml(crlf) == read_timeml(corpus_dir / "wsj_demo.tml")


def test_malformed_xml_reports_position(fixtures_dir):
    with pytest.raises(TimeMLError, match=r"malformed\.tml:\d+:\d+"):
        read_timeml(fixtures_dir / "malformed.tml")


def test_unknown_instance_is_skipped_and_reported(fixtures_dir):
    reader = TimeMLDocumentReader(fixtures_dir / "bad_link.tml")
    doc = reader.read()
    assert reader.skipped == ["l2"]
    assert {t.id for t in doc.tlinks} == {"l1", "l3"}


def test_repeated_instance_keeps_first_attributes(fixtures_dir):
    doc = read_timeml(fixtures_dir / "bad_link.tml")
    assert doc["e2"].attributes["eiid"] == "ei2"
    assert doc["e2"].attributes["polarity"] == "POS"
    l3 = next(t for t in doc.tlinks if t.id == "l3")
    assert (l3.source, l3.target) == ("e2", "t0")
    assert l3.attributes == {"origin": "USER"}


def test_missing_creation_time(tmp_path, corpus_dir):
    text = (corpus_dir / "apw_a.tml").read_text().replace("CREATION_TIME", "NONE")
    path = tmp_path / "nodct.tml"
    path.write_text(text)
    with pytest.raises(TimeMLError, match="CREATION_TIME"):
        read_timeml(path)


# -- JSONL ---------------------------------------------------------------------


def test_jsonl_round_trip(tmp_path, corpus_dir):
    ds = read_path(corpus_dir)
    write_jsonl(ds, tmp_path / "out.jsonl")
    back = read_jsonl(tmp_path / "out.jsonl", name=ds.name)
    assert back == ds


@pytest.mark.parametrize("name", TIMEML_FIXTURES)
def test_format_closure(tmp_path, corpus_dir, name):
    doc = read_timeml(corpus_dir / name)
    write_jsonl(Dataset("x", [doc]), tmp_path / "one.jsonl")
    assert read_jsonl(tmp_path / "one.jsonl").documents == (doc,)


def test_jsonl_preserves_split(tmp_path):
    doc = Document("a", "", None, [Entity("e1", EntityKind.EVENT)])
    ds = Dataset("x", [], [doc])
    write_jsonl(ds, tmp_path / "s.jsonl")
    assert read_jsonl(tmp_path / "s.jsonl").test == (doc,)


def test_before_serializes_to_point_tuple():
    doc = Document(
        "d", "", None, [Entity("a", EntityKind.EVENT), Entity("b", EntityKind.EVENT)],
        [TLink("a", "b", IntervalRelation.BEFORE, "l1")],
    )
    obj = document_to_dict(doc)
    assert obj["tlinks"][0]["relation"] == {"xs_ys": "<", "xs_ye": "<", "xe_ys": "<", "xe_ye": "<"}
    assert set(obj) == {"name", "text", "dct", "entities", "tlinks", "split"}
    assert set(obj["entities"][0]) == {"id", "kind", "text", "span", "attributes"}


def test_document_without_tlinks(tmp_path):
    doc = Document("d", "x", None, [])
    write_jsonl(Dataset("x", [doc]), tmp_path / "d.jsonl")
    line = json.loads((tmp_path / "d.jsonl").read_text())
    assert line["tlinks"] == []
    assert read_jsonl(tmp_path / "d.jsonl").documents == (doc,)


def test_vague_relation_serializes_nulls(fixtures_dir):
    ds = read_tabular(fixtures_dir / "matres_small.tsv", convention="MatresStartPoint")
    obj = document_to_dict(ds["docB"])
    assert obj["tlinks"][0]["relation"] == {"xs_ys": None, "xs_ye": None, "xe_ys": None, "xe_ye": None}


def test_malformed_jsonl_line_number(tmp_path, fixtures_dir):
    good = (fixtures_dir / "meets_starts.jsonl").read_text()
    path = tmp_path / "bad.jsonl"
    path.write_text(good + "{not json\n")
    with pytest.raises(JsonlError, match=r"bad\.jsonl:2:"):
        read_jsonl(path)
    # start(X) before start(Y) but after end(Y)
    path.write_text(good.replace('"xs_ye": "<"', '"xs_ye": ">"', 1))
    with pytest.raises(JsonlError, match=r":1:"):
        read_jsonl(path)


# -- tabular -------------------------------------------------------------------


def test_matres_row(fixtures_dir):
    ds = read_tabular(fixtures_dir / "matres_small.tsv", convention="MatresStartPoint")
    first = ds["docA"].tlinks[0]
    assert (first.source, first.target) == ("e1", "e2")
    assert first.relation.point == PointRelation(B, B, U, U)


def test_tabular_hand_count(fixtures_dir):
    ds = read_tabular(fixtures_dir / "matres_small.tsv", convention="matres")
    assert [d.name for d in ds] == ["docA", "docB"]
    assert dataset_stats(ds).tlinks == 3
    assert ds["docA"]["t1"].kind is EntityKind.TIMEX and ds["docA"]["t1"].span is None
    assert ds["docA"].dct is None and ds["docA"].text == ""


def test_tabular_empty_with_header(fixtures_dir):
    ds = read_tabular(fixtures_dir / "empty_header.tsv", TabularSchema(has_header=True))
    assert len(ds) == 0


def test_tabular_unknown_label_names_row(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("d\te1\te2\tBEFORE\nd\te1\te3\tSOMETIMES\n")
    with pytest.raises(TabularError, match="row 2"):
        read_tabular(path, convention="MatresStartPoint")


def test_tabular_column_count(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("d\te1\te2\n")
    with pytest.raises(TabularError, match="row 1"):
        read_tabular(path)


def test_tabular_schema_validation():
    with pytest.raises(TabularError):
        TabularSchema(("doc_name", "source_id", "relation"))
    with pytest.raises(TabularError):
        TabularSchema(("doc_name", "source_id", "target_id", "relation", "relation"))
    with pytest.raises(TabularError):
        TabularSchema(("doc_name", "source_id", "target_id", "label"))
    schema = TabularSchema(("doc_name", "ignore", "source_id", "target_id", "relation"), ",")
    assert schema.index("relation") == 4


def test_tabular_attaches_to_base(tmp_path, corpus_dir):
    base = read_path(corpus_dir)
    path = tmp_path / "links.csv"
    path.write_text("wsj_demo,x,ei1,ei3,BEFORE\nwsj_demo,x,2,e4,AFTER\nother,x,e1,e2,EQUAL\n")
    schema = TabularSchema(("doc_name", "ignore", "source_id", "target_id", "relation"), ",")
    ds = read_tabular(path, schema, "MatresStartPoint", base)
    doc = ds["wsj_demo"]
    assert doc.text == base["wsj_demo"].text
    assert [(t.source, t.target) for t in doc.tlinks] == [("e1", "e3"), ("e2", "e4")]
    assert len(doc.entities) == len(base["wsj_demo"].entities)
    assert ds["other"].text == ""


# -- registry and fetch --------------------------------------------------------


def _zip_members(path: Path) -> dict[str, bytes]:
    with zipfile.ZipFile(path) as zf:
        return {Path(n).name: zf.read(n) for n in zf.namelist() if not n.endswith("/")}


def test_bundled_archive_matches_fixtures(corpus_dir):
    members = _zip_members(BUNDLED_ZIP)
    assert members == {p.name: p.read_bytes() for p in corpus_dir.glob("*.tml")}


def _registry(tmp_path, **overrides) -> Registry:
    shutil.copy(BUNDLED_ZIP, tmp_path / "corpus.zip")
    entry = {
        "name": "demo",
        "url": "corpus.zip",
        "checksum": hashlib.sha256(BUNDLED_ZIP.read_bytes()).hexdigest(),
        "format": "TimeML",
        "relation_convention": "TimeML",
    }
    entry.update(overrides)
    path = tmp_path / "registry.json"
    path.write_text(json.dumps({"version": 1, "corpora": [entry]}))
    return Registry.load(path)


def test_bundled_registry_entries():
    reg = Registry.load()
    assert {"fixture_corpus", "tempeval_3", "matres"} <= set(reg.names)
    assert reg.get("matres").base == "tempeval_3"


def test_unknown_corpus_lists_names():
    with pytest.raises(UnknownCorpusError, match="available: .*fixture_corpus"):
        Registry.load().get("nope")
    with pytest.raises(UnknownCorpusError):
        read_dataset("nope")


def test_fetch_extracts_and_marks(tmp_path):
    reg = _registry(tmp_path)
    data = tmp_path / "data"
    path = fetch("demo", reg, data)
    assert (path / MARKER).exists() and is_fetched("demo", data)
    assert len(list(path.rglob("*.tml"))) == 3


def test_fetch_is_idempotent(tmp_path):
    reg = _registry(tmp_path)
    data = tmp_path / "data"
    first = fetch("demo", reg, data)
    (tmp_path / "corpus.zip").unlink()  # a second download would now fail
    assert fetch("demo", reg, data) == first


def test_fetch_file_url(tmp_path):
    reg = _registry(tmp_path, url=(tmp_path / "corpus.zip").as_uri())
    assert is_fetched("demo", tmp_path / "data") is False
    fetch("demo", reg, tmp_path / "data")
    assert is_fetched("demo", tmp_path / "data")


def test_fetch_checksum_mismatch(tmp_path):
    reg = _registry(tmp_path, checksum="0" * 64)
    with pytest.raises(FetchError, match="checksum"):
        fetch("demo", reg, tmp_path / "data")
    assert not is_fetched("demo", tmp_path / "data")
    assert not (tmp_path / "data" / "demo").exists()
    assert list((tmp_path / "data").iterdir()) == []


def test_fetch_unsupported_archive(tmp_path):
    (tmp_path / "plain.txt").write_text("hello")
    reg = _registry(tmp_path, url="plain.txt", checksum=None)
    with pytest.raises(FetchError, match="unsupported archive"):
        fetch("demo", reg, tmp_path / "data")


def test_fetch_without_url(tmp_path):
    reg = _registry(tmp_path, url=None)
    with pytest.raises(FetchError, match="no download url"):
        fetch("demo", reg, tmp_path / "data")


def test_fetch_missing_file_url(tmp_path):
    reg = _registry(tmp_path, url=(tmp_path / "missing.zip").as_uri())
    with pytest.raises(FetchError):
        fetch("demo", reg, tmp_path / "data")


def test_read_dataset_from_path_all_train(corpus_dir):
    ds = read_dataset(corpus_dir)
    assert len(ds.train) == 3 and ds.test == ()


def test_read_dataset_requires_fetch(tmp_path):
    reg = _registry(tmp_path)
    with pytest.raises(DataMissingError, match="tiekit fetch demo"):
        read_dataset("demo", reg, tmp_path / "data")


def test_read_dataset_with_split(tmp_path):
    reg = _registry(tmp_path, split={"train": ["wsj_demo.tml"], "test": ["apw_*.tml"]})
    fetch("demo", reg, tmp_path / "data")
    ds = read_dataset("demo", reg, tmp_path / "data")
    assert [d.name for d in ds.train] == ["wsj_demo"]
    assert [d.name for d in ds.test] == ["apw_a", "apw_b"]


def test_read_dataset_applies_patches(tmp_path, fixtures_dir):
    shutil.copy(fixtures_dir / "patches.json", tmp_path / "patches.json")
    reg = _registry(tmp_path, patches="patches.json")
    fetch("demo", reg, tmp_path / "data")
    ds = read_dataset("demo", reg, tmp_path / "data")
    assert sorted(d.name for d in ds) == ["apw_a", "wsj_demo"]
    links = {t.id: t for t in ds["wsj_demo"].tlinks}
    assert "l1" not in links
    assert links["l2"].relation == TemporalRelation(IntervalRelation.AFTER)


def test_patch_errors(corpus_dir):
    ds = read_path(corpus_dir)
    with pytest.raises(PatchError):
        apply_patches(ds, {"wsj_demo": [{"op": "drop_tlink", "id": "nope"}]}, "TimeML")
    out = apply_patches(ds, {"wsj_demo": [{"op": "drop_entity", "id": "e1"}]}, "TimeML")
    assert "e1" not in out["wsj_demo"]
    assert all("e1" not in t.pair for t in out["wsj_demo"].tlinks)


def test_load_patches_rejects_non_object(tmp_path):
    path = tmp_path / "p.json"
    path.write_text("[]")
    with pytest.raises(PatchError):
        load_patches(path)


def test_tabular_registry_entry_with_base(tmp_path):
    shutil.copy(BUNDLED_ZIP, tmp_path / "corpus.zip")
    links = tmp_path / "links"
    links.mkdir()
    (links / "starts.txt").write_text("wsj_demo\tei1\tei3\tBEFORE\n")
    with zipfile.ZipFile(tmp_path / "links.zip", "w") as zf:
        zf.write(links / "starts.txt", "starts.txt")
    registry = {
        "version": 1,
        "corpora": [
            {"name": "demo", "url": "corpus.zip"},
            {
                "name": "starts",
                "url": "links.zip",
                "format": "Tabular",
                "relation_convention": "MatresStartPoint",
                "base": "demo",
                "schema": {"columns": ["doc_name", "source_id", "target_id", "relation"]},
            },
        ],
    }
    (tmp_path / "registry.json").write_text(json.dumps(registry))
    reg = Registry.load(tmp_path / "registry.json")
    data = tmp_path / "data"
    fetch("demo", reg, data)
    fetch("starts", reg, data)
    ds = read_dataset("starts", reg, data)
    assert [d.name for d in ds] == ["wsj_demo"]
    assert ds["wsj_demo"].tlinks[0].relation.point == PointRelation(B, B, U, U)
