"""Crowd-labeling sessions: vote capture, verdict aggregation, export.

Each candidate item collects votes_required binary votes from distinct
labelers. At full count the verdict is Need when more than half of the
votes are positive, NoNeed when none are, and Suspend otherwise (a
disagreement). Below full count the item is Pending.

Votes persist in an append-only line file; replaying it on startup
reconstructs all aggregates, so the file is the whole session state.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DuplicateVote, IoError, ItemComplete, MalformedLine, UnknownItem


class Verdict(str, Enum):
    NEED = "need"
    NO_NEED = "no_need"
    SUSPEND = "suspend"
    PENDING = "pending"


@dataclass(frozen=True, slots=True)
class LabelVote:
    item_id: str
    labeler_id: str
    has_need: bool
    submitted_at: str = ""


@dataclass(frozen=True, slots=True)
class AggregatedLabel:
    item_id: str
    verdict: Verdict
    vote_count: int
    positive_votes: int


@dataclass(frozen=True, slots=True)
class Progress:
    items_total: int
    completed: int
    pending: int
    votes_total: int
    per_labeler: Mapping[str, int]


def verdict_for(positive_votes: int, vote_count: int, votes_required: int = 3) -> Verdict:
    """Pure verdict rule.

    Pending below the required count; at full count: Need when positive
    votes exceed half, NoNeed when zero, Suspend otherwise. With the
    default of 3 votes this is Need at >= 2, NoNeed at 0, Suspend at 1.
    """
    if vote_count < votes_required:
        return Verdict.PENDING
    if positive_votes == 0:
        return Verdict.NO_NEED
    if positive_votes * 2 > votes_required:
        return Verdict.NEED
    return Verdict.SUSPEND


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class LabelStore:
    """Items plus their votes, with optional append-only persistence.

    All mutating and reading entry points take one lock, so concurrent
    vote submissions for the same item serialize and capacity is
    enforced exactly.
    """

    def __init__(
        self,
        items: Iterable[tuple[str, str]] = (),
        votes_path: str | Path | None = None,
        votes_required: int = 3,
    ) -> None:
        if votes_required < 1 or votes_required % 2 == 0:
            raise ValueError("votes_required must be an odd integer >= 1")
        self.votes_required = votes_required
        self.votes_path = Path(votes_path) if votes_path is not None else None
        self._lock = threading.Lock()
        self._items: dict[str, str] = {}
        # item_id -> labeler_id -> has_need
        self._votes: dict[str, dict[str, bool]] = {}
        for item_id, text in items:
            if item_id in self._items:
                raise ValueError(f"duplicate item id {item_id!r}")
            self._items[item_id] = text
            self._votes[item_id] = {}
        if self.votes_path is not None and self.votes_path.exists():
            self._replay()

    def _replay(self) -> None:
        assert self.votes_path is not None
        try:
            lines = self.votes_path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoError(f"cannot read vote store {self.votes_path}: {exc}") from exc
        for line in lines:
            if not line.strip():
                continue
            vote = parse_vote_line(line)
            self._record(vote, persist=False)

    def _record(self, vote: LabelVote, persist: bool) -> AggregatedLabel:
        if vote.item_id not in self._items:
            raise UnknownItem(f"unknown item {vote.item_id!r}")
        cast = self._votes[vote.item_id]
        if vote.labeler_id in cast:
            raise DuplicateVote(f"{vote.labeler_id!r} already voted on {vote.item_id!r}")
        if len(cast) >= self.votes_required:
            raise ItemComplete(f"item {vote.item_id!r} already has {self.votes_required} votes")
        if persist and self.votes_path is not None:
            try:
                self.votes_path.parent.mkdir(parents=True, exist_ok=True)
                with self.votes_path.open("a", encoding="utf-8") as fh:
                    fh.write(vote_to_line(vote) + "\n")
            except OSError as exc:
                raise IoError(f"cannot append to vote store {self.votes_path}: {exc}") from exc
        cast[vote.labeler_id] = vote.has_need
        return self._aggregate_locked(vote.item_id)

    def _aggregate_locked(self, item_id: str) -> AggregatedLabel:
        cast = self._votes[item_id]
        positive = sum(1 for v in cast.values() if v)
        return AggregatedLabel(
            item_id=item_id,
            verdict=verdict_for(positive, len(cast), self.votes_required),
            vote_count=len(cast),
            positive_votes=positive,
        )

    def submit_vote(
        self,
        item_id: str,
        labeler_id: str,
        has_need: bool,
        submitted_at: str | None = None,
    ) -> AggregatedLabel:
        """Persist one vote and return the updated aggregate."""
        if not labeler_id:
            raise ValueError("labeler_id must be non-empty")
        vote = LabelVote(item_id, labeler_id, bool(has_need), submitted_at or _now())
        with self._lock:
            return self._record(vote, persist=True)

    def next_item(self, labeler_id: str) -> tuple[str, str] | None:
        """Most-voted eligible item for this labeler, ties by item id.

        Eligible means: fewer than votes_required votes and no vote yet
        from this labeler. Preferring nearly complete items finishes
        them early so training can start on partial exports.
        """
        if not labeler_id:
            raise ValueError("labeler_id must be non-empty")
        with self._lock:
            best: tuple[int, str] | None = None
            for item_id, cast in self._votes.items():
                if len(cast) >= self.votes_required or labeler_id in cast:
                    continue
                key = (-len(cast), item_id)
                if best is None or key < best:
                    best = key
            if best is None:
                return None
            item_id = best[1]
            return item_id, self._items[item_id]

    def aggregate(self, item_id: str) -> AggregatedLabel:
        with self._lock:
            if item_id not in self._items:
                raise UnknownItem(f"unknown item {item_id!r}")
            return self._aggregate_locked(item_id)

    def export(self) -> list[tuple[str, str, Verdict]]:
        """Completed items as (item_id, text, verdict), sorted by id.

        Suspend items stay tagged; downstream dataset building decides
        their exclusion. Pending items never export.
        """
        with self._lock:
            rows = []
            for item_id in sorted(self._items):
                agg = self._aggregate_locked(item_id)
                if agg.verdict is not Verdict.PENDING:
                    rows.append((item_id, self._items[item_id], agg.verdict))
            return rows

    def progress(self) -> Progress:
        with self._lock:
            per_labeler: dict[str, int] = {}
            completed = 0
            votes_total = 0
            for cast in self._votes.values():
                votes_total += len(cast)
                if len(cast) >= self.votes_required:
                    completed += 1
                for labeler in cast:
                    per_labeler[labeler] = per_labeler.get(labeler, 0) + 1
            return Progress(
                items_total=len(self._items),
                completed=completed,
                pending=len(self._items) - completed,
                votes_total=votes_total,
                per_labeler=per_labeler,
            )


def vote_to_line(vote: LabelVote) -> str:
    return json.dumps(
        {
            "item_id": vote.item_id,
            "labeler_id": vote.labeler_id,
            "has_need": vote.has_need,
            "submitted_at": vote.submitted_at,
        },
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )


def parse_vote_line(line: str) -> LabelVote:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLine(f"unparseable vote line: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedLine("vote line is not a key/value object")
    try:
        return LabelVote(
            item_id=str(obj["item_id"]),
            labeler_id=str(obj["labeler_id"]),
            has_need=bool(obj["has_need"]),
            submitted_at=str(obj.get("submitted_at", "")),
        )
    except KeyError as exc:
        raise MalformedLine(f"vote line missing field {exc}") from exc


def export_to_line(item_id: str, text: str, verdict: Verdict) -> str:
    return json.dumps(
        {"id": item_id, "text": text, "verdict": verdict.value},
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )


def parse_export_line(line: str) -> tuple[str, str, Verdict]:
    try:
        obj = json.loads(line)
        return str(obj["id"]), str(obj["text"]), Verdict(obj["verdict"])
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise MalformedLine(f"unparseable export line: {exc}") from exc


def write_export(rows: Iterable[tuple[str, str, Verdict]], path: str | Path) -> int:
    rows = list(rows)
    try:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8") as fh:
            for item_id, text, verdict in rows:
                fh.write(export_to_line(item_id, text, verdict) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write export to {path}: {exc}") from exc
    return len(rows)


def read_export(path: str | Path) -> list[tuple[str, str, Verdict]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read export {path}: {exc}") from exc
    return [parse_export_line(line) for line in lines if line.strip()]
