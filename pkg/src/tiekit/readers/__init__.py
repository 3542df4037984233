"""Readers for corpora in their native formats."""

from __future__ import annotations

import logging
import os
from pathlib import Path

from tiekit.model import Dataset, Document
from tiekit.readers.jsonl import JsonlError, read_jsonl, write_jsonl
from tiekit.readers.patches import apply_patches, load_patches
from tiekit.readers.registry import (
    MARKER,
    CorpusFormat,
    FetchError,
    Registry,
    RegistryEntry,
    RegistryError,
    UnknownCorpusError,
    fetch,
    is_fetched,
)
from tiekit.readers.tabular import TabularError, TabularSchema, read_tabular
from tiekit.readers.timeml import BaseDocumentReader, TimeMLDocumentReader, TimeMLError, read_timeml

log = logging.getLogger(__name__)

__all__ = [
    "BaseDocumentReader",
    "TimeMLDocumentReader",
    "TimeMLError",
    "read_timeml",
    "TabularSchema",
    "TabularError",
    "read_tabular",
    "JsonlError",
    "read_jsonl",
    "write_jsonl",
    "Registry",
    "RegistryEntry",
    "RegistryError",
    "UnknownCorpusError",
    "CorpusFormat",
    "FetchError",
    "fetch",
    "is_fetched",
    "read_dataset",
    "read_path",
    "DataMissingError",
    "default_data_dir",
]

TIMEML_SUFFIXES = (".tml", ".xml", ".timeml")


class DataMissingError(FileNotFoundError):
    pass


def default_data_dir() -> Path:
    return Path(os.environ.get("TIE_DATA_DIR", "./data"))


def _timeml_files(root: Path) -> list[Path]:
    return sorted(p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in TIMEML_SUFFIXES)


def _read_timeml_files(paths) -> list[Document]:
    return [read_timeml(p) for p in paths]


def read_path(path, name: str | None = None) -> Dataset:
    """Read a TimeML file, a JSONL file, or a directory of either; no split, all train."""
    path = Path(path)
    if path.is_file():
        if path.suffix.lower() == ".jsonl":
            return read_jsonl(path, name)
        return Dataset(name or path.stem, [read_timeml(path)])
    if not path.is_dir():
        raise DataMissingError(f"no such file or directory: {path}")
    docs = _read_timeml_files(_timeml_files(path))
    for jl in sorted(path.rglob("*.jsonl")):
        docs.extend(read_jsonl(jl).documents)
    return Dataset(name or path.name, docs)


def _expand(root: Path, patterns) -> list[Path]:
    out: list[Path] = []
    for pattern in patterns:
        hits = sorted(root.glob(pattern))
        if not hits:
            raise DataMissingError(f"split member {pattern!r} not found under {root}")
        out.extend(hits)
    return out


def _collect(entry: RegistryEntry, root: Path, members: list[Path], registry, data_dir) -> list[Document]:
    docs: list[Document] = []
    if entry.format is CorpusFormat.TIMEML:
        for m in members:
            docs.extend(_read_timeml_files(_timeml_files(m) if m.is_dir() else [m]))
    elif entry.format is CorpusFormat.JSON_LINES:
        for m in members:
            files = sorted(m.rglob("*.jsonl")) if m.is_dir() else [m]
            for f in files:
                docs.extend(read_jsonl(f).documents)
    else:
        base = read_dataset(entry.base, registry, data_dir) if entry.base else None
        for m in members:
            files = sorted(p for p in m.rglob("*") if p.is_file() and not p.name.startswith(".")) if m.is_dir() else [m]
            for f in files:
                docs.extend(read_tabular(f, entry.schema, entry.relation_convention, base).documents)
    return docs


def read_dataset(name_or_path, registry: Registry | None = None, data_dir=None) -> Dataset:
    """Read a registered corpus by name, or any supported file/directory by path.

    Registered corpora are split into train/test as their entry describes; with
    no split description every document goes to train.
    """
    registry = registry or Registry.load()
    data_dir = Path(data_dir) if data_dir is not None else default_data_dir()
    if str(name_or_path) not in registry:
        path = Path(name_or_path)
        if path.exists():
            return read_path(path)
        # raises, listing the available names
        registry.get(str(name_or_path))

    entry = registry.get(str(name_or_path))
    root = data_dir / entry.name
    if not root.is_dir():
        raise DataMissingError(f"corpus {entry.name!r} not found under {data_dir}; run `tiekit fetch {entry.name}` first")
    if entry.root:
        root = root / entry.root

    if entry.split:
        train = _collect(entry, root, _expand(root, entry.split.get("train", ())), registry, data_dir)
        test = _collect(entry, root, _expand(root, entry.split.get("test", ())), registry, data_dir)
    else:
        train, test = _collect(entry, root, [root], registry, data_dir), []
    ds = Dataset(entry.name, train, test)
    if entry.patches:
        patch_path = Path(entry.patches)
        if not patch_path.is_absolute() and entry.registry_dir is not None:
            patch_path = entry.registry_dir / patch_path
        ds = apply_patches(ds, load_patches(patch_path), entry.relation_convention)
    return ds
