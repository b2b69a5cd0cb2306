"""Record parsing, keyword matching, and the append-only corpus store.

Records travel as line-delimited JSON objects with string fields
``id``, ``text``, ``lang``, ``created_at``, ``source``. The store is a
plain append-only file in the same format; the id index is rebuilt on
open, so the file itself is the single source of truth.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import EmptyText, IoError, MalformedLine, MissingField

SOURCES = ("stream", "decahose", "file")
MAX_TEXT_LEN = 1000

_LANG_RE = re.compile(r"^[a-z]{2}$|^$")


@dataclass(frozen=True, slots=True)
class TweetRecord:
    """One micro-blog post."""

    id: str
    text: str
    lang: str = ""
    created_at: str = ""
    source: str = "file"


@dataclass(frozen=True)
class KeywordSet:
    """Lowercase search phrases; multi-word phrases use single spaces."""

    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ValueError("keyword set must not be empty")
        if len(set(self.keywords)) != len(self.keywords):
            raise ValueError("keyword set contains duplicate phrases")
        for kw in self.keywords:
            if not kw or kw != normalize_keyword(kw):
                raise ValueError(f"keyword not normalized: {kw!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "KeywordSet":
        phrases = []
        for raw in read_wordlist(path):
            kw = normalize_keyword(raw)
            if kw and kw not in phrases:
                phrases.append(kw)
        return cls(tuple(phrases))


def normalize_keyword(phrase: str) -> str:
    """Case-fold and collapse inner whitespace to single spaces."""
    return " ".join(phrase.casefold().split())


def read_wordlist(path: str | Path) -> list[str]:
    """Read a one-entry-per-line UTF-8 list; '#' starts a comment line."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read word list {path}: {exc}") from exc
    entries = []
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return entries


def parse_record(line: str) -> TweetRecord:
    """Parse one record line into a validated TweetRecord.

    Raises MalformedLine / MissingField / EmptyText; never returns a
    partially valid record.
    """
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedLine(f"unparseable record line: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedLine("record line is not a key/value object")

    raw_id = obj.get("id")
    if isinstance(raw_id, int):
        raw_id = str(raw_id)
    if raw_id is None:
        raise MissingField("record has no id")
    if not isinstance(raw_id, str):
        raise MalformedLine("id must be a string")
    if not raw_id.strip():
        raise MissingField("record id is empty")

    text = obj.get("text")
    if text is None:
        raise MissingField(f"record {raw_id}: no text")
    if not isinstance(text, str):
        raise MalformedLine(f"record {raw_id}: text must be a string")
    if not text.strip():
        raise EmptyText(f"record {raw_id}: text empty after trim")
    if len(text) > MAX_TEXT_LEN:
        raise MalformedLine(f"record {raw_id}: text exceeds {MAX_TEXT_LEN} chars")

    lang = obj.get("lang", "")
    if not isinstance(lang, str):
        raise MalformedLine(f"record {raw_id}: lang must be a string")
    lang = lang.lower()
    if not _LANG_RE.match(lang):
        raise MalformedLine(f"record {raw_id}: lang must be 2 lowercase letters or empty")

    created_at = obj.get("created_at", "")
    if not isinstance(created_at, str):
        raise MalformedLine(f"record {raw_id}: created_at must be a string")

    source = obj.get("source", "file")
    if source not in SOURCES:
        raise MalformedLine(f"record {raw_id}: source must be one of {SOURCES}")

    return TweetRecord(id=raw_id, text=text, lang=lang, created_at=created_at, source=source)


def record_to_line(r: TweetRecord) -> str:
    """Serialize a record to its canonical single-line form."""
    return json.dumps(
        {"id": r.id, "text": r.text, "lang": r.lang, "created_at": r.created_at, "source": r.source},
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )


def matches_keywords(text: str, ks: KeywordSet) -> bool:
    """True iff the case-folded text contains any keyword phrase as a
    contiguous substring. Multi-word phrases match across single spaces."""
    folded = text.casefold()
    return any(kw in folded for kw in ks.keywords)


@dataclass(frozen=True, slots=True)
class IngestReport:
    """Per-file ingest accounting.

    Every parseable line lands in exactly one of matched (newly stored),
    duplicates (id already present), or non_matching (no keyword hit):
    read == matched + duplicates + non_matching. rejected counts
    unparseable or invalid lines, which are not part of read.
    """

    read: int = 0
    matched: int = 0
    rejected: int = 0
    duplicates: int = 0
    non_matching: int = 0


@dataclass
class CorpusStore:
    """Append-only record store backed by a line file.

    Single writer; the in-memory id set is rebuilt from the file on
    open, so a reopened store always reflects exactly the file contents.
    """

    path: Path
    _ids: set[str] = field(default_factory=set, repr=False)

    @classmethod
    def open(cls, path: str | Path) -> "CorpusStore":
        store = cls(path=Path(path))
        if store.path.exists():
            for record in store.records():
                store._ids.add(record.id)
        return store

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._ids

    def records(self) -> Iterator[TweetRecord]:
        """Yield all stored records in file order."""
        if not self.path.exists():
            return
        try:
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        yield parse_record(line)
        except OSError as exc:
            raise IoError(f"cannot read corpus store {self.path}: {exc}") from exc

    def add(self, record: TweetRecord) -> bool:
        """Append a record; returns False (and skips) if the id exists."""
        if record.id in self._ids:
            return False
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(record_to_line(record) + "\n")
        except OSError as exc:
            raise IoError(f"cannot append to corpus store {self.path}: {exc}") from exc
        self._ids.add(record.id)
        return True

    def ingest(self, path: str | Path, ks: KeywordSet) -> IngestReport:
        """Ingest a record file: keep keyword-matching records, skip
        already-present ids, count per-line errors without aborting."""
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoError(f"cannot read ingest file {path}: {exc}") from exc

        read = matched = rejected = duplicates = non_matching = 0
        for line in lines:
            if not line.strip():
                continue
            try:
                record = parse_record(line)
            except (MalformedLine, MissingField, EmptyText):
                rejected += 1
                continue
            read += 1
            if not matches_keywords(record.text, ks):
                non_matching += 1
            elif not self.add(record):
                duplicates += 1
            else:
                matched += 1
        return IngestReport(read, matched, rejected, duplicates, non_matching)


def write_records(records: Iterable[TweetRecord], path: str | Path) -> int:
    """Write records to a line file; returns the count written."""
    records = list(records)
    try:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8") as fh:
            for record in records:
                fh.write(record_to_line(record) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write records to {path}: {exc}") from exc
    return len(records)
