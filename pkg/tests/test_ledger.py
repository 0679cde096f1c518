from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from togglehealth.ledger import (
    Action,
    EventLedger,
    LedgerFormatError,
    ProjectContext,
    RefactorPolicy,
    Status,
    ToggleEvent,
    ToggleRecord,
    build_records,
    format_instant,
    parse_instant,
    records_from_json,
    records_to_json,
)

T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)


def ev(name: str, action: Action, commit: str, when: datetime) -> ToggleEvent:
    return ToggleEvent(name, action, commit, when, source_path="watched/file")


def days(n: float) -> timedelta:
    return timedelta(days=n)


class TestToggleEvent:
    def test_empty_name_rejected(self):
        with pytest.raises(ValueError):
            ToggleEvent("", Action.ADDED, "c1", T0)

    def test_naive_timestamp_coerced_to_utc(self):
        event = ToggleEvent("F", Action.ADDED, "c1", datetime(2020, 1, 1))
        assert event.timestamp.tzinfo == timezone.utc

    def test_round_trip(self):
        event = ev("F", Action.REMOVED, "c9", T0)
        assert ToggleEvent.from_dict(event.to_dict()) == event


class TestInstantFormat:
    def test_z_suffix(self):
        assert format_instant(T0) == "2020-01-01T00:00:00Z"

    def test_parse_both_forms(self):
        assert parse_instant("2020-01-01T00:00:00Z") == T0
        assert parse_instant("2020-01-01T00:00:00+00:00") == T0
        assert parse_instant("2020-01-01") == T0


class TestEventLedger:
    def test_build_sorts_by_timestamp_then_commit(self):
        events = [
            ev("B", Action.ADDED, "c2", T0 + days(1)),
            ev("A", Action.ADDED, "c1", T0),
            ev("C", Action.ADDED, "c1", T0 + days(1)),
        ]
        ledger = EventLedger.build(events)
        assert [e.toggle_name for e in ledger.events] == ["A", "C", "B"]
        assert ledger.mined_range == (T0, T0 + days(1))

    def test_stable_within_commit(self):
        # same timestamp and commit: insertion (diff) order is preserved
        events = [
            ev("X", Action.REMOVED, "c1", T0),
            ev("X", Action.ADDED, "c1", T0),
        ]
        ledger = EventLedger.build(events)
        assert [e.action for e in ledger.events] == [Action.REMOVED, Action.ADDED]

    def test_jsonl_round_trip(self):
        ledger = EventLedger.build(
            [ev("A", Action.ADDED, "c1", T0), ev("A", Action.REMOVED, "c2", T0 + days(3))]
        )
        again = EventLedger.from_jsonl(ledger.to_jsonl())
        assert again.events == ledger.events
        assert again.to_jsonl() == ledger.to_jsonl()

    def test_bad_jsonl_raises(self):
        with pytest.raises(LedgerFormatError):
            EventLedger.from_jsonl('{"toggle": "A"}\n')
        with pytest.raises(LedgerFormatError):
            EventLedger.from_jsonl("not json\n")

    def test_totals(self):
        ledger = EventLedger.build(
            [
                ev("A", Action.ADDED, "c1", T0),
                ev("B", Action.ADDED, "c2", T0),
                ev("A", Action.REMOVED, "c3", T0 + days(1)),
            ]
        )
        assert ledger.additions_total == 2
        assert ledger.removals_total == 1


class TestBuildRecords:
    def test_direct_pairing(self):
        ledger = EventLedger.build(
            [ev("F", Action.ADDED, "c1", T0), ev("F", Action.REMOVED, "c2", T0 + days(10))]
        )
        records = build_records(ledger, RefactorPolicy.RAW_PAIRS)
        assert len(records) == 1
        record = records[0]
        assert record.status is Status.REMOVED
        assert record.lifespan_days == pytest.approx(10.0)
        assert not record.anomalous

    def test_same_commit_pair_coalesced(self):
        # a refactor rewrites the declaration: remove+add in one commit
        ledger = EventLedger.build(
            [
                ev("F", Action.ADDED, "c1", T0),
                ev("F", Action.REMOVED, "c3", T0 + days(5)),
                ev("F", Action.ADDED, "c3", T0 + days(5)),
            ]
        )
        records = build_records(ledger, RefactorPolicy.COALESCE_SAME_COMMIT)
        assert len(records) == 1
        assert records[0].status is Status.ACTIVE
        assert records[0].added_at == T0

    def test_same_commit_pair_raw(self):
        ledger = EventLedger.build(
            [
                ev("F", Action.ADDED, "c1", T0),
                ev("F", Action.REMOVED, "c3", T0 + days(5)),
                ev("F", Action.ADDED, "c3", T0 + days(5)),
            ]
        )
        records = build_records(ledger, RefactorPolicy.RAW_PAIRS)
        assert len(records) == 2
        closed, reopened = records
        assert closed.status is Status.REMOVED
        assert closed.lifespan_days == pytest.approx(5.0)
        assert reopened.status is Status.ACTIVE
        assert reopened.added_at == T0 + days(5)
        assert reopened.export_name == "F#2"

    def test_orphan_removal_anchors_to_range_start(self, caplog):
        ledger = EventLedger.build(
            [ev("G", Action.REMOVED, "c1", T0 + days(3))],
            mined_range=(T0, T0 + days(4)),
        )
        with caplog.at_level("WARNING"):
            records = build_records(ledger)
        assert len(records) == 1
        assert records[0].added_at == T0
        assert records[0].orphan
        assert "no observed addition" in caplog.text

    def test_empty_ledger(self):
        assert build_records(EventLedger.build([])) == []

    def test_re_added_toggle_opens_new_record(self):
        ledger = EventLedger.build(
            [
                ev("F", Action.ADDED, "c1", T0),
                ev("F", Action.REMOVED, "c2", T0 + days(2)),
                ev("F", Action.ADDED, "c3", T0 + days(7)),
            ]
        )
        records = build_records(ledger)
        assert [r.export_name for r in records] == ["F", "F#2"]
        assert records[1].status is Status.ACTIVE

    def test_records_json_round_trip(self):
        ledger = EventLedger.build(
            [
                ev("F", Action.ADDED, "c1", T0),
                ev("F", Action.REMOVED, "c2", T0 + days(2)),
                ev("F", Action.ADDED, "c3", T0 + days(7)),
            ]
        )
        records = build_records(ledger)
        again = records_from_json(records_to_json(records))
        assert [(r.toggle_name, r.occurrence, r.status) for r in again] == [
            (r.toggle_name, r.occurrence, r.status) for r in records
        ]


# Balanced per-name streams: a removal is only drawn when a life is open,
# so the RawPairs active-count identity is exact.
@st.composite
def balanced_event_streams(draw):
    steps = draw(
        st.lists(
            st.tuples(st.sampled_from("ABCDE"), st.booleans()),
            min_size=0,
            max_size=60,
        )
    )
    open_counts: dict[str, int] = {}
    events = []
    for index, (name, want_remove) in enumerate(steps):
        if want_remove and open_counts.get(name, 0) > 0:
            action = Action.REMOVED
            open_counts[name] -= 1
        else:
            action = Action.ADDED
            open_counts[name] = open_counts.get(name, 0) + 1
        events.append(ev(name, action, f"c{index:04d}", T0 + timedelta(hours=index)))
    return events


@settings(max_examples=200)
@given(balanced_event_streams())
def test_active_count_identity_raw_pairs(events):
    ledger = EventLedger.build(events)
    records = build_records(ledger, RefactorPolicy.RAW_PAIRS)
    active = sum(1 for r in records if r.status is Status.ACTIVE)
    assert active == ledger.additions_total - ledger.removals_total
    # closed records never outnumber removal events
    removed = sum(1 for r in records if r.status is Status.REMOVED)
    assert removed <= ledger.removals_total


@settings(max_examples=100)
@given(balanced_event_streams(), st.sampled_from(list(RefactorPolicy)))
def test_build_records_deterministic(events, policy):
    ledger = EventLedger.build(events)
    first = build_records(ledger, policy)
    second = build_records(ledger, policy)
    assert [(r.export_name, r.added_at, r.removed_at) for r in first] == [
        (r.export_name, r.added_at, r.removed_at) for r in second
    ]


@settings(max_examples=100)
@given(balanced_event_streams(), st.sampled_from(list(RefactorPolicy)))
def test_sorted_ledger_yields_no_negative_lifespans(events, policy):
    ledger = EventLedger.build(events)
    for record in build_records(ledger, policy):
        if record.status is Status.REMOVED:
            assert record.removed_at >= record.added_at
            assert not record.anomalous


class TestProjectContext:
    def test_validation(self):
        with pytest.raises(ValueError):
            ProjectContext("p", analysis_months=0, lines_of_code=10, release_cycle_days=30)
        with pytest.raises(ValueError):
            ProjectContext("p", analysis_months=1, lines_of_code=0, release_cycle_days=30)
        with pytest.raises(ValueError):
            ProjectContext("p", analysis_months=1, lines_of_code=10, release_cycle_days=0)

    def test_anomalous_record_flagging(self):
        record = ToggleRecord("F", added_at=T0, removed_at=T0 - days(2))
        assert record.anomalous
        assert record.lifespan_days == pytest.approx(-2.0)
