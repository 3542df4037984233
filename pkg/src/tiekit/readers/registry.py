"""Corpus registry and downloader.

The registry is a JSON file listing corpora by name; adding a corpus means
adding an entry, not code. The README describes the entry format.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import shutil
import tarfile
import urllib.error
import urllib.parse
import urllib.request
import zipfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from tiekit.readers.tabular import TabularSchema
from tiekit.relations import RelationConvention

log = logging.getLogger(__name__)

__all__ = [
    "CorpusFormat",
    "RegistryEntry",
    "Registry",
    "RegistryError",
    "UnknownCorpusError",
    "FetchError",
    "fetch",
    "is_fetched",
    "MARKER",
]

MARKER = ".complete"


class RegistryError(ValueError):
    pass


class UnknownCorpusError(RegistryError, KeyError):
    def __str__(self):
        return self.args[0]


class FetchError(RuntimeError):
    pass


class CorpusFormat(enum.Enum):
    TIMEML = "TimeML"
    TABULAR = "Tabular"
    JSON_LINES = "JsonLines"

    @classmethod
    def from_name(cls, name: str) -> CorpusFormat:
        for fmt in cls:
            if name.lower() in (fmt.value.lower(), fmt.name.lower()):
                return fmt
        raise RegistryError(f"unknown corpus format {name!r}")


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    url: str | None = None
    checksum: str | None = None
    format: CorpusFormat = CorpusFormat.TIMEML
    relation_convention: RelationConvention = RelationConvention.TIMEML
    split: dict[str, tuple[str, ...]] | None = None
    root: str | None = None
    schema: TabularSchema | None = None
    base: str | None = None
    patches: str | None = None
    description: str = ""
    registry_dir: Path | None = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, obj: dict, registry_dir: Path | None = None) -> RegistryEntry:
        try:
            name = obj["name"]
        except KeyError:
            raise RegistryError(f"registry entry without a name: {obj}") from None
        split = obj.get("split")
        if split is not None:
            unknown = set(split) - {"train", "test"}
            if unknown:
                raise RegistryError(f"{name}: unknown split names {sorted(unknown)}")
            split = {k: tuple(v) for k, v in split.items()}
        try:
            fmt = CorpusFormat.from_name(obj.get("format", "TimeML"))
            conv = RelationConvention.from_name(obj.get("relation_convention", "TimeML"))
        except ValueError as exc:
            raise RegistryError(f"{name}: {exc}") from None
        schema = obj.get("schema")
        return cls(
            name=name,
            url=obj.get("url"),
            checksum=obj.get("checksum"),
            format=fmt,
            relation_convention=conv,
            split=split,
            root=obj.get("root"),
            schema=TabularSchema.from_dict(schema) if schema else None,
            base=obj.get("base"),
            patches=obj.get("patches"),
            description=obj.get("description", ""),
            registry_dir=registry_dir,
        )


class Registry:
    def __init__(self, entries=(), path: Path | None = None):
        self.path = path
        self._entries: dict[str, RegistryEntry] = {}
        for entry in entries:
            if entry.name in self._entries:
                raise RegistryError(f"duplicate registry entry {entry.name!r}")
            self._entries[entry.name] = entry

    @classmethod
    def load(cls, path=None) -> Registry:
        """Load a registry file; the bundled one when ``path`` is None."""
        if path is None:
            ref = resources.files("tiekit") / "data" / "registry.json"
            with resources.as_file(ref) as real:
                return cls.load(real)
        path = Path(path)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RegistryError(f"cannot read registry {path}: {exc}") from exc
        entries = [RegistryEntry.from_dict(e, path.parent) for e in obj.get("corpora", [])]
        return cls(entries, path)

    @property
    def names(self) -> list[str]:
        return sorted(self._entries)

    def __contains__(self, name) -> bool:
        return name in self._entries

    def get(self, name: str) -> RegistryEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownCorpusError(
                f"unknown corpus {name!r}; available: {', '.join(self.names) or '(none)'}"
            ) from None


def is_fetched(name: str, dest_dir) -> bool:
    return (Path(dest_dir) / name / MARKER).exists()


def _open_source(entry: RegistryEntry):
    url = entry.url
    scheme = urllib.parse.urlparse(url).scheme
    if scheme in ("http", "https", "file", "ftp"):
        try:
            return urllib.request.urlopen(url, timeout=60)
        except urllib.error.HTTPError as exc:
            raise FetchError(f"HTTP {exc.code} fetching {url}") from exc
        except urllib.error.URLError as exc:
            raise FetchError(f"cannot fetch {url}: {exc.reason}") from exc
    local = Path(url)
    if not local.is_absolute() and entry.registry_dir is not None:
        local = entry.registry_dir / local
    try:
        return local.open("rb")
    except OSError as exc:
        raise FetchError(f"cannot fetch {url}: {exc}") from exc


def _extract(archive: Path, target: Path):
    target_abs = target.resolve()

    def check(member: str):
        dest = (target / member).resolve()
        if target_abs not in dest.parents and dest != target_abs:
            raise FetchError(f"archive member escapes destination: {member}")

    if zipfile.is_zipfile(archive):
        with zipfile.ZipFile(archive) as zf:
            for member in zf.namelist():
                check(member)
            zf.extractall(target)
    elif tarfile.is_tarfile(archive):
        with tarfile.open(archive) as tf:
            for member in tf.getmembers():
                check(member.name)
                if member.issym() or member.islnk():
                    raise FetchError(f"archive contains a link: {member.name}")
            tf.extractall(target)
    else:
        raise FetchError(f"unsupported archive type: {archive.name}")


def fetch(name: str, registry: Registry, dest_dir) -> Path:
    """Download and unpack a registered corpus under ``dest_dir/name``.

    Idempotent: once the completion marker exists nothing is downloaded again.
    """
    entry = registry.get(name)
    dest_dir = Path(dest_dir)
    target = dest_dir / name
    if (target / MARKER).exists():
        log.info("%s already present at %s", name, target)
        return target
    if not entry.url:
        raise FetchError(
            f"no download url configured for {name!r}; place the corpus under {target} "
            f"and create {target / MARKER}, or set 'url' in the registry"
        )
    dest_dir.mkdir(parents=True, exist_ok=True)
    download = dest_dir / f".{name}.download"
    digest = hashlib.sha256()
    try:
        with _open_source(entry) as src, download.open("wb") as out:
            while chunk := src.read(1 << 16):
                digest.update(chunk)
                out.write(chunk)
        if entry.checksum and digest.hexdigest() != entry.checksum.lower():
            raise FetchError(
                f"checksum mismatch for {name}: expected {entry.checksum}, got {digest.hexdigest()}"
            )
        if target.exists():
            shutil.rmtree(target)
        target.mkdir(parents=True)
        try:
            _extract(download, target)
        except Exception:
            shutil.rmtree(target, ignore_errors=True)
            raise
        (target / MARKER).write_text(digest.hexdigest() + "\n", encoding="utf-8")
    finally:
        download.unlink(missing_ok=True)
    return target
