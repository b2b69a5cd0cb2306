"""Language filter, URL exclusion, and duplicate collapse."""
from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from needminer.corpus import TweetRecord
from needminer.filtering import (
    assert_monotone,
    contains_url,
    dedup_key,
    is_german,
    report_records,
    run_filters,
)


def rec(i: int, text: str, lang: str = "de", minute: int = 0) -> TweetRecord:
    return TweetRecord(
        id=f"f{i:03d}", text=text, lang=lang,
        created_at=f"2015-04-01T10:{minute:02d}:00Z",
    )


# --- stage predicates ----------------------------------------------------


def test_is_german_requires_exact_tag():
    assert is_german(rec(1, "x", lang="de"))
    for lang in ("en", "fr", "", "DE"[:0] + "at"):
        assert not is_german(rec(1, "x", lang=lang))


def test_contains_url_detects_all_three_prefixes():
    assert contains_url("schau https://t.co/abc")
    assert contains_url("schau http://example.de")
    assert contains_url("schau WWW.EXAMPLE.DE jetzt")
    assert not contains_url("kein link, nur text mit www im wort: schwwwach")


def test_dedup_key_strips_retweet_marker_and_mentions():
    assert dedup_key("RT @alice: Strom ist teuer") == "strom ist teuer"
    assert dedup_key("@bob Strom ist teuer") == "strom ist teuer"
    assert dedup_key("Strom ist teuer") == "strom ist teuer"


def test_dedup_key_casefolds_and_collapses_whitespace():
    assert dedup_key("  STROM   ist\tteuer ") == "strom ist teuer"
    assert dedup_key("rt rt @a @b  Hallo") == "hallo"


@given(st.text(max_size=120))
def test_dedup_key_is_idempotent(text):
    key = dedup_key(text)
    assert dedup_key(key) == key


# --- the funnel ----------------------------------------------------------


def test_funnel_counts_on_hand_fixture(funnel_records):
    retained, report = run_filters(funnel_records)
    assert report_records(report) == {
        "input_count": 10,
        "after_language": 6,
        "after_url": 4,
        "after_dedup": 3,
    }
    assert [r.id for r in retained] == ["t01", "t06", "t07"]


def test_retweet_mention_and_bare_texts_share_one_key(funnel_records):
    trio = [r for r in funnel_records if r.id in ("t01", "t02", "t03")]
    keys = {dedup_key(r.text) for r in trio}
    assert keys == {"strom ist teuer"}


def test_duplicate_winner_is_earliest_then_smallest_id():
    a = rec(2, "@x Strom sparen", minute=5)
    b = rec(1, "RT Strom sparen", minute=5)
    c = rec(3, "Strom sparen", minute=9)
    retained, report = run_filters([a, b, c])
    assert [r.id for r in retained] == ["f001"]
    assert set(report.removed_duplicate) == {"f002", "f003"}


def test_removed_ids_partition_the_input(funnel_records):
    retained, report = run_filters(funnel_records)
    removed = set(report.removed_language) | set(report.removed_url) | set(report.removed_duplicate)
    kept = {r.id for r in retained}
    assert removed | kept == {r.id for r in funnel_records}
    assert removed & kept == set()
    assert_monotone(report)


def test_language_and_url_stages_commute(funnel_records):
    """The two record predicates are independent: filtering by language
    then URL keeps the same set as URL then language."""
    lang_first = [r for r in funnel_records if is_german(r)]
    lang_first = {r.id for r in lang_first if not contains_url(r.text)}
    url_first = [r for r in funnel_records if not contains_url(r.text)]
    url_first = {r.id for r in url_first if is_german(r)}
    assert lang_first == url_first


def test_empty_input_yields_all_zero_report():
    retained, report = run_filters([])
    assert retained == []
    assert report_records(report) == {
        "input_count": 0,
        "after_language": 0,
        "after_url": 0,
        "after_dedup": 0,
    }


def test_filtering_is_idempotent(funnel_records):
    once, report_once = run_filters(funnel_records)
    twice, report_twice = run_filters(once)
    assert twice == once
    assert report_twice.after_dedup == report_once.after_dedup
    assert report_twice.input_count == report_once.after_dedup


@given(
    st.lists(
        st.builds(
            TweetRecord,
            id=st.text(alphabet="abcdef0123456789", min_size=1, max_size=6),
            text=st.text(min_size=1, max_size=60),
            lang=st.sampled_from(["de", "en", ""]),
            created_at=st.sampled_from(
                ["2015-04-01T10:00:00Z", "2015-04-02T10:00:00Z", "2015-04-03T10:00:00Z"]
            ),
        ),
        max_size=25,
    )
)
def test_retained_records_are_german_urlfree_and_key_unique(records):
    retained, report = run_filters(records)
    assert_monotone(report)
    keys = [dedup_key(r.text) for r in retained]
    assert len(set(keys)) == len(keys)
    for r in retained:
        assert is_german(r)
        assert not contains_url(r.text)
