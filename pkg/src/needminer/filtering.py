"""Candidate-set reduction: language filter, URL exclusion, dedup.

The three stages always run in the order language -> URL -> dedup;
the first two are independent record predicates, dedup must run last
because its winner rule depends on the surviving set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import TweetRecord

_URL_PREFIXES = ("http://", "https://", "www.")


def is_german(r: TweetRecord) -> bool:
    """True iff the record's metadata language tag is exactly "de"."""
    return r.lang == "de"


def contains_url(text: str) -> bool:
    """True iff any whitespace-delimited token starts with http://,
    https://, or www. (case-insensitive)."""
    for token in text.split():
        folded = token.casefold()
        if folded.startswith(_URL_PREFIXES):
            return True
    return False


def dedup_key(text: str) -> str:
    """Normalize text to its duplicate-detection key.

    Leading "RT" tokens (optionally with a trailing colon) and leading
    "@handle" tokens are stripped repeatedly, then the remainder is
    case-folded with whitespace runs collapsed to single spaces.
    Equal keys mean duplicate content.
    """
    tokens = text.split()
    while tokens:
        head = tokens[0].casefold()
        if head in ("rt", "rt:") or head.startswith("@"):
            tokens.pop(0)
        else:
            break
    return " ".join(tokens).casefold()


@dataclass(frozen=True)
class FilterReport:
    """Stage-by-stage funnel counts plus removed ids for audit."""

    input_count: int
    after_language: int
    after_url: int
    after_dedup: int
    removed_language: tuple[str, ...] = field(default=())
    removed_url: tuple[str, ...] = field(default=())
    removed_duplicate: tuple[str, ...] = field(default=())


def run_filters(records: Iterable[TweetRecord]) -> tuple[list[TweetRecord], FilterReport]:
    """Apply the full funnel and report each stage's survivor count.

    Duplicate winner: earliest created_at, ties broken by lexicographic
    id. The retained list is sorted by (created_at, id) so downstream
    artifacts are deterministic.
    """
    records = list(records)
    input_count = len(records)

    german = [r for r in records if is_german(r)]
    removed_language = tuple(r.id for r in records if not is_german(r))

    url_free = [r for r in german if not contains_url(r.text)]
    removed_url = tuple(r.id for r in german if contains_url(r.text))

    by_key: dict[str, TweetRecord] = {}
    for r in sorted(url_free, key=lambda r: (r.created_at, r.id)):
        by_key.setdefault(dedup_key(r.text), r)
    retained = sorted(by_key.values(), key=lambda r: (r.created_at, r.id))
    kept_ids = {r.id for r in retained}
    removed_duplicate = tuple(r.id for r in url_free if r.id not in kept_ids)

    report = FilterReport(
        input_count=input_count,
        after_language=len(german),
        after_url=len(url_free),
        after_dedup=len(retained),
        removed_language=removed_language,
        removed_url=removed_url,
        removed_duplicate=removed_duplicate,
    )
    return retained, report


def report_lines(report: FilterReport) -> list[str]:
    """Human-readable funnel table."""
    return [
        f"{'input':<16}{report.input_count:>8}",
        f"{'after_language':<16}{report.after_language:>8}",
        f"{'after_url':<16}{report.after_url:>8}",
        f"{'after_dedup':<16}{report.after_dedup:>8}",
    ]


def report_records(report: FilterReport) -> dict[str, int]:
    """Machine-readable funnel counts."""
    return {
        "input_count": report.input_count,
        "after_language": report.after_language,
        "after_url": report.after_url,
        "after_dedup": report.after_dedup,
    }


def assert_monotone(report: FilterReport) -> None:
    """Funnel counts must never increase across stages."""
    seq: Sequence[int] = (
        report.input_count,
        report.after_language,
        report.after_url,
        report.after_dedup,
    )
    for earlier, later in zip(seq, seq[1:]):
        if later > earlier:
            raise AssertionError(f"funnel not monotone: {seq}")
