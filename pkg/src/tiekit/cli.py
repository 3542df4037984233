"""Command-line interface.

Exit codes: 0 success, 1 input or configuration error, 2 temporally
inconsistent input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from tiekit.metrics import (
    EvaluationError,
    Kind,
    Matching,
    Policy,
    awareness_scores,
    classification_scores,
    identification_scores,
)
from tiekit.model import Dataset, DocumentError, dataset_stats
from tiekit.readers import (
    DataMissingError,
    FetchError,
    JsonlError,
    Registry,
    RegistryError,
    TabularError,
    TabularSchema,
    TimeMLError,
    fetch,
    is_fetched,
    read_dataset,
    read_jsonl,
    read_path,
    read_tabular,
    read_timeml,
)
from tiekit.readers.jsonl import dumps_dataset, tlink_to_dict
from tiekit.relations import RelationError
from tiekit.timegraph import InconsistencyError, Timegraph

log = logging.getLogger("tiekit")

EXIT_OK, EXIT_INPUT, EXIT_INCONSISTENT = 0, 1, 2

_INPUT_ERRORS = (
    RegistryError,
    FetchError,
    DataMissingError,
    TimeMLError,
    JsonlError,
    TabularError,
    EvaluationError,
    DocumentError,
    RelationError,
    OSError,
)


class UsageError(ValueError):
    pass


@dataclass
class CliConfig:
    data_dir: Path
    registry_path: Path | None = None
    output: str = "text"

    def registry(self) -> Registry:
        return Registry.load(self.registry_path)


def _emit(cfg: CliConfig, obj: dict, text: str):
    """JSON mode: one object on stdout, human text on stderr."""
    if cfg.output == "json":
        sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")
        if text:
            sys.stderr.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_fetch(cfg: CliConfig, args) -> int:
    registry = cfg.registry()
    already = is_fetched(args.corpus, cfg.data_dir)
    path = fetch(args.corpus, registry, cfg.data_dir)
    status = "already present" if already else "fetched"
    _emit(cfg, {"corpus": args.corpus, "path": str(path), "status": status}, f"{args.corpus}: {status} at {path}")
    return EXIT_OK


def _stats_table(name: str, rows: dict[str, dict[str, int]]) -> str:
    cols = ("docs", "events", "timexs", "tlinks")
    lines = [f"{name}", f"{'split':<8}" + "".join(f"{c:>10}" for c in cols)]
    for split, counts in rows.items():
        lines.append(f"{split:<8}" + "".join(f"{counts[c]:>10}" for c in cols))
    return "\n".join(lines)


def cmd_stats(cfg: CliConfig, args) -> int:
    ds = read_dataset(args.corpus, cfg.registry(), cfg.data_dir)
    rows = {
        "train": dataset_stats(ds.train).as_dict(),
        "test": dataset_stats(ds.test).as_dict(),
        "total": dataset_stats(ds).as_dict(),
    }
    _emit(cfg, {"corpus": ds.name, **rows}, _stats_table(ds.name, rows))
    return EXIT_OK


def _load_document(path: Path, fmt: str, doc_name: str | None):
    if fmt == "auto":
        fmt = "jsonl" if path.suffix.lower() == ".jsonl" else "timeml"
    if fmt == "timeml":
        return read_timeml(path)
    docs = read_jsonl(path).documents
    if doc_name is not None:
        for doc in docs:
            if doc.name == doc_name:
                return doc
        raise UsageError(f"{path}: no document named {doc_name!r}")
    if len(docs) != 1:
        raise UsageError(f"{path} holds {len(docs)} documents; pick one with --doc")
    return docs[0]


def cmd_closure(cfg: CliConfig, args) -> int:
    doc = _load_document(Path(args.input), args.format, args.doc)
    try:
        closed = Timegraph(doc.tlinks).closure()
    except InconsistencyError as exc:
        witness = [tlink_to_dict(t) for t in exc.witness]
        if cfg.output == "json":
            sys.stdout.write(json.dumps({"consistent": False, "witness": witness}, sort_keys=True) + "\n")
        else:
            sys.stderr.write(f"{doc.name}: {exc}\n")
            for tl in witness:
                sys.stderr.write(json.dumps(tl) + "\n")
        return EXIT_INCONSISTENT
    for tl in sorted(closed, key=lambda t: (t.source, t.target)):
        sys.stdout.write(json.dumps(tlink_to_dict(tl)) + "\n")
    return EXIT_OK


_TASKS = {
    "timex-id": Kind.TIMEX,
    "event-id": Kind.EVENT,
    "tlink-id": Kind.TLINK_PAIR,
    "tlink-cls": None,
}


def _documents(ds: Dataset, split: str):
    docs = {"all": ds.documents, "train": ds.train, "test": ds.test}[split]
    return {d.name: d for d in docs}


def _fmt_scores(label: str, scores: dict) -> str:
    return f"{label:<10}P={scores['precision']:.4f}  R={scores['recall']:.4f}  F1={scores['f1']:.4f}"


def cmd_evaluate(cfg: CliConfig, args) -> int:
    gold_path, pred_path = Path(args.gold), Path(args.pred)
    if pred_path.suffix.lower() != ".jsonl":
        raise UsageError(f"predictions must be canonical JSONL: {pred_path}")
    gold = _documents(read_path(gold_path), args.split)
    pred = _documents(read_jsonl(pred_path), "all")
    kind = _TASKS[args.task]
    if kind is not None:
        report = identification_scores(gold, pred, kind, Matching(args.matching.capitalize()))
        out = {"task": args.task, **report.as_dict()}
        text = "\n".join(
            [f"{args.task} ({args.matching})", _fmt_scores("micro", out["micro"]), _fmt_scores("macro", out["macro"])]
        )
    else:
        policy = {"drop-greedy": Policy.DROP_GREEDY, "fail-hard": Policy.FAIL_HARD}[args.inconsistency_policy]
        cls = classification_scores(gold, pred)
        aware = awareness_scores(gold, pred, policy)
        out = {"task": args.task, **cls.as_dict(), **aware.as_dict()}
        text = "\n".join(
            [
                "tlink-cls",
                _fmt_scores("micro", out["micro"]),
                f"{'accuracy':<10}{cls.accuracy:.4f}  spurious={cls.spurious}",
                f"{'awareness':<10}TP={aware.temporal_precision:.4f}  TR={aware.temporal_recall:.4f}  "
                f"TF1={aware.tf1:.4f}  dropped={aware.total.dropped}",
            ]
        )
    _emit(cfg, out, text)
    return EXIT_OK


def cmd_convert(cfg: CliConfig, args) -> int:
    path = Path(args.input)
    if args.format == "tabular":
        schema = TabularSchema(tuple(args.columns.split(",")), args.delimiter.encode().decode("unicode_escape"), args.header)
        ds = read_tabular(path, schema, args.convention)
    elif args.format == "timeml":
        ds = Dataset(path.stem, [read_timeml(path)]) if path.is_file() else read_path(path)
    elif args.format == "jsonl":
        ds = read_jsonl(path)
    else:
        ds = read_path(path)
    payload = dumps_dataset(ds)
    if args.output_file in (None, "-"):
        sys.stdout.write(payload)
    else:
        Path(args.output_file).write_text(payload, encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tiekit", description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", help="corpus directory (default: $TIE_DATA_DIR or ./data)")
    parser.add_argument("--registry", help="registry file (default: the bundled one)")
    parser.add_argument("--output", choices=("text", "json"), default="text")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download a registered corpus")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("stats", help="count documents, events, timexs and tlinks")
    p.add_argument("corpus", help="registry name or path")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("closure", help="print the temporal closure of a document's tlinks")
    p.add_argument("input")
    p.add_argument("--format", choices=("auto", "timeml", "jsonl"), default="auto")
    p.add_argument("--doc", help="document name, for JSONL files with several documents")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("evaluate", help="score predictions against gold annotations")
    p.add_argument("--task", choices=tuple(_TASKS), required=True)
    p.add_argument("gold", help="gold TimeML file/directory or JSONL")
    p.add_argument("pred", help="predictions as JSONL")
    p.add_argument("--matching", choices=("strict", "relaxed"), default="strict")
    p.add_argument("--inconsistency-policy", choices=("drop-greedy", "fail-hard"), default="drop-greedy")
    p.add_argument("--split", choices=("all", "train", "test"), default="all", help="gold documents to score")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("convert", help="convert a corpus to canonical JSONL")
    p.add_argument("input")
    p.add_argument("--to", choices=("jsonl",), default="jsonl")
    p.add_argument("-o", "--output-file", help="destination (default: stdout)")
    p.add_argument("--format", choices=("auto", "timeml", "jsonl", "tabular"), default="auto")
    p.add_argument("--convention", default="TimeML", help="relation labels: TimeML, Interval, PointMap, MatresStartPoint")
    p.add_argument("--columns", default="doc_name,source_id,target_id,relation")
    p.add_argument("--delimiter", default="\\t")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    data_dir = Path(args.data_dir or os.environ.get("TIE_DATA_DIR", "./data"))
    cfg = CliConfig(data_dir, Path(args.registry) if args.registry else None, args.output)
    try:
        return args.func(cfg, args)
    except InconsistencyError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INCONSISTENT
    except (UsageError, *_INPUT_ERRORS) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
