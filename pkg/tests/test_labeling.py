"""Vote aggregation, item scheduling, persistence, and export."""
from __future__ import annotations

import itertools

import pytest

from needminer.errors import DuplicateVote, ItemComplete, MalformedLine, UnknownItem
from needminer.labeling import (
    LabelStore,
    LabelVote,
    Verdict,
    parse_export_line,
    parse_vote_line,
    read_export,
    verdict_for,
    vote_to_line,
    write_export,
)


def make_store(n: int, **kwargs) -> LabelStore:
    return LabelStore(items=[(f"i{k:03d}", f"text {k}") for k in range(n)], **kwargs)


def generated_vote_matrix() -> dict[str, tuple[bool, bool, bool]]:
    """Deterministic 2,396-item vote matrix: 332 majority-positive items,
    1,596 unanimous negatives, 468 single-positive disagreements."""
    matrix: dict[str, tuple[bool, bool, bool]] = {}
    for i in range(2396):
        if i < 332:
            flags = (True, True, False) if i % 2 == 0 else (True, True, True)
        elif i < 332 + 1596:
            flags = (False, False, False)
        else:
            flags = (True, False, False)
        matrix[f"c{i:04d}"] = flags
    return matrix


# --- verdict rule ---------------------------------------------------------


def test_verdict_table_is_exhaustive_at_three_votes():
    assert verdict_for(0, 3) is Verdict.NO_NEED
    assert verdict_for(1, 3) is Verdict.SUSPEND
    assert verdict_for(2, 3) is Verdict.NEED
    assert verdict_for(3, 3) is Verdict.NEED


def test_verdict_examples():
    assert verdict_for(2, 3) is Verdict.NEED       # [T, T, F]
    assert verdict_for(0, 3) is Verdict.NO_NEED    # [F, F, F]
    assert verdict_for(1, 3) is Verdict.SUSPEND    # [T, F, F]
    assert verdict_for(1, 2) is Verdict.PENDING    # only two votes yet


def test_verdict_generalizes_to_other_odd_counts():
    assert verdict_for(3, 5, votes_required=5) is Verdict.NEED
    assert verdict_for(2, 5, votes_required=5) is Verdict.SUSPEND
    assert verdict_for(0, 5, votes_required=5) is Verdict.NO_NEED
    assert verdict_for(1, 1, votes_required=1) is Verdict.NEED
    assert verdict_for(4, 5, votes_required=5) is Verdict.NEED


def test_votes_required_must_be_odd():
    with pytest.raises(ValueError):
        make_store(1, votes_required=2)
    with pytest.raises(ValueError):
        make_store(1, votes_required=0)


# --- vote capture ---------------------------------------------------------


def test_vote_progression_pending_until_third_vote():
    store = make_store(1)
    agg = store.submit_vote("i000", "ann", True)
    assert (agg.verdict, agg.vote_count) == (Verdict.PENDING, 1)
    agg = store.submit_vote("i000", "ben", True)
    assert (agg.verdict, agg.vote_count) == (Verdict.PENDING, 2)
    agg = store.submit_vote("i000", "cara", False)
    assert (agg.verdict, agg.vote_count, agg.positive_votes) == (Verdict.NEED, 3, 2)


def test_duplicate_vote_rejected():
    store = make_store(1)
    store.submit_vote("i000", "ann", True)
    with pytest.raises(DuplicateVote):
        store.submit_vote("i000", "ann", False)


def test_fourth_vote_rejected():
    store = make_store(1)
    for labeler in ("ann", "ben", "cara"):
        store.submit_vote("i000", labeler, False)
    with pytest.raises(ItemComplete):
        store.submit_vote("i000", "dave", True)


def test_unknown_item_rejected():
    store = make_store(1)
    with pytest.raises(UnknownItem):
        store.submit_vote("missing", "ann", True)
    with pytest.raises(UnknownItem):
        store.aggregate("missing")


# --- scheduling -----------------------------------------------------------


def test_next_item_prefers_most_voted_eligible():
    store = LabelStore(items=[("A", "a"), ("B", "b")])
    store.submit_vote("A", "x", True)
    store.submit_vote("A", "y", False)
    assert store.next_item("L1") == ("A", "a")


def test_next_item_skips_own_votes_and_completed_items():
    store = LabelStore(items=[("A", "a"), ("B", "b")])
    store.submit_vote("A", "L1", True)
    assert store.next_item("L1") == ("B", "b")
    for labeler in ("x", "y", "z"):
        store.submit_vote("B", labeler, False)
    assert store.next_item("L1") is None  # B complete, A already voted


def test_next_item_breaks_vote_ties_by_item_id():
    store = LabelStore(items=[("B", "b"), ("A", "a")])
    assert store.next_item("L1") == ("A", "a")


def test_three_labelers_exhaust_fifty_items_without_repeats():
    store = make_store(50)
    seen: dict[str, set[str]] = {"ann": set(), "ben": set(), "cara": set()}
    active = True
    while active:
        active = False
        for labeler in seen:
            nxt = store.next_item(labeler)
            if nxt is None:
                continue
            item_id, _ = nxt
            assert item_id not in seen[labeler]
            seen[labeler].add(item_id)
            store.submit_vote(item_id, labeler, len(seen[labeler]) % 2 == 0)
            active = True
    progress = store.progress()
    assert progress.completed == 50
    assert progress.votes_total == 150
    assert all(len(items) == 50 for items in seen.values())


# --- aggregation at scale -------------------------------------------------


def test_generated_matrix_aggregates_to_expected_partition():
    matrix = generated_vote_matrix()
    store = LabelStore(items=[(item, item) for item in matrix])
    for item, flags in matrix.items():
        for labeler, flag in zip(("ann", "ben", "cara"), flags):
            store.submit_vote(item, labeler, flag)
    counts = {verdict: 0 for verdict in Verdict}
    for item in matrix:
        counts[store.aggregate(item).verdict] += 1
    assert counts[Verdict.NEED] == 332
    assert counts[Verdict.NO_NEED] == 1596
    assert counts[Verdict.SUSPEND] == 468
    assert counts[Verdict.PENDING] == 0


def test_vote_order_never_changes_a_verdict():
    matrix = {item: flags for item, flags in list(generated_vote_matrix().items())[:40]}
    baseline = None
    for perm in itertools.permutations(range(3)):
        store = LabelStore(items=[(item, item) for item in matrix])
        for item, flags in matrix.items():
            for pos in perm:
                store.submit_vote(item, ("ann", "ben", "cara")[pos], flags[pos])
        verdicts = {item: store.aggregate(item).verdict for item in matrix}
        if baseline is None:
            baseline = verdicts
        assert verdicts == baseline


# --- progress ------------------------------------------------------------


def test_fresh_session_progress():
    progress = make_store(10).progress()
    assert (progress.items_total, progress.completed, progress.pending) == (10, 0, 10)
    assert progress.votes_total == 0
    assert dict(progress.per_labeler) == {}


def test_progress_conservation():
    store = make_store(4)
    store.submit_vote("i000", "ann", True)
    store.submit_vote("i000", "ben", True)
    store.submit_vote("i001", "ann", False)
    progress = store.progress()
    assert progress.votes_total == sum(progress.per_labeler.values()) == 3
    assert progress.completed + progress.pending == progress.items_total


# --- persistence and export ------------------------------------------------


def test_vote_file_replay_restores_aggregates(tmp_path):
    path = tmp_path / "votes.jsonl"
    store = make_store(3, votes_path=path)
    store.submit_vote("i000", "ann", True)
    store.submit_vote("i000", "ben", True)
    store.submit_vote("i000", "cara", False)
    store.submit_vote("i001", "ann", False)

    replayed = make_store(3, votes_path=path)
    assert replayed.aggregate("i000").verdict is Verdict.NEED
    assert replayed.aggregate("i001").vote_count == 1
    assert replayed.progress().votes_total == 4
    with pytest.raises(DuplicateVote):
        replayed.submit_vote("i001", "ann", True)


def test_vote_line_roundtrip_and_malformed_line():
    vote = LabelVote("i1", "ann", True, "2015-04-08T00:00:00Z")
    assert parse_vote_line(vote_to_line(vote)) == vote
    with pytest.raises(MalformedLine):
        parse_vote_line("{nope")
    with pytest.raises(MalformedLine):
        parse_vote_line('{"item_id": "a"}')


def test_export_contains_only_completed_items_sorted():
    store = LabelStore(items=[("z9", "tz"), ("a1", "ta"), ("m5", "tm")])
    for labeler in ("ann", "ben", "cara"):
        store.submit_vote("z9", labeler, True)
        store.submit_vote("a1", labeler, False)
    store.submit_vote("m5", "ann", True)  # still pending
    rows = store.export()
    assert rows == [("a1", "ta", Verdict.NO_NEED), ("z9", "tz", Verdict.NEED)]


def test_export_counts_by_verdict(tmp_path):
    store = make_store(17)
    flags_by_slot = [(True, True, True)] * 4 + [(False, False, False)] * 10 + [(True, False, False)] * 3
    for k, flags in enumerate(flags_by_slot):
        for labeler, flag in zip(("ann", "ben", "cara"), flags):
            store.submit_vote(f"i{k:03d}", labeler, flag)
    rows = store.export()
    tally = {verdict: 0 for verdict in Verdict}
    for _, _, verdict in rows:
        tally[verdict] += 1
    assert tally[Verdict.NEED] == 4
    assert tally[Verdict.NO_NEED] == 10
    assert tally[Verdict.SUSPEND] == 3

    path = tmp_path / "labels.jsonl"
    assert write_export(rows, path) == 17
    assert read_export(path) == rows


def test_parse_export_line_rejects_unknown_verdict():
    with pytest.raises(MalformedLine):
        parse_export_line('{"id": "a", "text": "t", "verdict": "maybe"}')
