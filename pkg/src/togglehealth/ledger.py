"""Canonical data model: raw toggle events, per-toggle lifecycle records, project context.

An :class:`EventLedger` is an ordered stream of additions and removals mined
from version control.  :func:`build_records` folds that stream into one
:class:`ToggleRecord` per toggle life, pairing each addition with the next
removal of the same name.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0


class Action(Enum):
    ADDED = "added"
    REMOVED = "removed"


class Status(Enum):
    ACTIVE = "active"
    REMOVED = "removed"


class RefactorPolicy(Enum):
    """How a same-commit remove+add pair of one toggle name is interpreted.

    COALESCE_SAME_COMMIT treats the pair as an in-place modification (a syntax
    rewrite, a reorder): it neither closes nor opens a life, so the toggle
    keeps its original addition date.  RAW_PAIRS takes the events at face
    value: the removal closes the open life and the addition starts a new one.
    """

    COALESCE_SAME_COMMIT = "coalesce"
    RAW_PAIRS = "raw"


def parse_instant(text: str) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken as UTC."""
    ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_instant(ts: datetime) -> str:
    """Render a UTC instant as ISO-8601 with second precision and Z suffix."""
    return ts.astimezone(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


def _as_utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class ToggleEvent:
    """One addition or removal of a named toggle at a commit."""

    toggle_name: str
    action: Action
    commit_id: str
    timestamp: datetime
    source_path: str = ""

    def __post_init__(self):
        if not self.toggle_name:
            raise ValueError("toggle_name must be non-empty")
        object.__setattr__(self, "timestamp", _as_utc(self.timestamp))

    @property
    def sort_key(self) -> tuple[datetime, str]:
        return (self.timestamp, self.commit_id)

    def to_dict(self) -> dict:
        return {
            "toggle": self.toggle_name,
            "action": self.action.value,
            "commit": self.commit_id,
            "timestamp": format_instant(self.timestamp),
            "path": self.source_path,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ToggleEvent":
        return cls(
            toggle_name=data["toggle"],
            action=Action(data["action"]),
            commit_id=data["commit"],
            timestamp=parse_instant(data["timestamp"]),
            source_path=data.get("path", ""),
        )


@dataclass
class EventLedger:
    """Sorted event stream for one repository, with the mined commit range."""

    events: list[ToggleEvent] = field(default_factory=list)
    repo_label: str = ""
    mined_range: tuple[datetime, datetime] | None = None

    @classmethod
    def build(
        cls,
        events: Iterable[ToggleEvent],
        repo_label: str = "",
        mined_range: tuple[datetime, datetime] | None = None,
    ) -> "EventLedger":
        """Assemble a ledger, imposing the (timestamp, commit_id) total order.

        The sort is stable, so events of one commit keep their diff order.
        When ``mined_range`` is not supplied it falls back to the event span.
        """
        ordered = sorted(events, key=lambda e: e.sort_key)
        if mined_range is None and ordered:
            mined_range = (ordered[0].timestamp, ordered[-1].timestamp)
        if mined_range is not None:
            mined_range = (_as_utc(mined_range[0]), _as_utc(mined_range[1]))
        return cls(events=ordered, repo_label=repo_label, mined_range=mined_range)

    @property
    def additions_total(self) -> int:
        return sum(1 for e in self.events if e.action is Action.ADDED)

    @property
    def removals_total(self) -> int:
        return sum(1 for e in self.events if e.action is Action.REMOVED)

    def to_jsonl(self) -> str:
        """One event per line: keys toggle, action, commit, timestamp, path."""
        return "".join(json.dumps(e.to_dict(), sort_keys=False) + "\n" for e in self.events)

    def write_jsonl(self, path: Path | str) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str, repo_label: str = "") -> "EventLedger":
        events = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(ToggleEvent.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise LedgerFormatError(f"bad event on line {lineno}: {exc}") from exc
        return cls.build(events, repo_label=repo_label)

    @classmethod
    def read_jsonl(cls, path: Path | str, repo_label: str = "") -> "EventLedger":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"), repo_label=repo_label)


class LedgerFormatError(ValueError):
    """Raised when a serialized ledger or record set cannot be parsed."""


@dataclass
class ToggleRecord:
    """A toggle's reconstructed lifecycle: birth, optional death, lifespan."""

    toggle_name: str
    added_at: datetime
    removed_at: datetime | None = None
    occurrence: int = 1
    orphan: bool = False  # removal seen without a prior addition in the mined range

    def __post_init__(self):
        self.added_at = _as_utc(self.added_at)
        if self.removed_at is not None:
            self.removed_at = _as_utc(self.removed_at)

    @property
    def status(self) -> Status:
        return Status.REMOVED if self.removed_at is not None else Status.ACTIVE

    @property
    def lifespan_days(self) -> float | None:
        if self.removed_at is None:
            return None
        return (self.removed_at - self.added_at).total_seconds() / SECONDS_PER_DAY

    @property
    def anomalous(self) -> bool:
        """True for removed records whose computed lifespan is negative."""
        span = self.lifespan_days
        return span is not None and span < 0

    @property
    def export_name(self) -> str:
        """Toggle name, suffixed with the occurrence ordinal for re-added lives."""
        if self.occurrence > 1:
            return f"{self.toggle_name}#{self.occurrence}"
        return self.toggle_name

    def age_days(self, as_of: datetime) -> float:
        return (_as_utc(as_of) - self.added_at).total_seconds() / SECONDS_PER_DAY

    def to_dict(self) -> dict:
        return {
            "toggle": self.export_name,
            "added_at": format_instant(self.added_at),
            "removed_at": format_instant(self.removed_at) if self.removed_at else None,
            "lifespan_days": self.lifespan_days,
            "status": self.status.value,
            "anomalous": self.anomalous,
            "orphan": self.orphan,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ToggleRecord":
        name = data["toggle"]
        occurrence = 1
        if "#" in name:
            base, _, ordinal = name.rpartition("#")
            if base and ordinal.isdigit():
                name, occurrence = base, int(ordinal)
        return cls(
            toggle_name=name,
            added_at=parse_instant(data["added_at"]),
            removed_at=parse_instant(data["removed_at"]) if data.get("removed_at") else None,
            occurrence=occurrence,
            orphan=bool(data.get("orphan", False)),
        )


def records_to_json(records: list[ToggleRecord]) -> str:
    return json.dumps([r.to_dict() for r in records], indent=2) + "\n"


def records_from_json(text: str) -> list[ToggleRecord]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LedgerFormatError(f"bad records file: {exc}") from exc
    return [ToggleRecord.from_dict(item) for item in raw]


@dataclass
class ProjectContext:
    """Normalization denominators for one project.

    analysis_months and release_cycle_days are supplied, not inferred, so that
    results are reproducible against an agreed analysis window and cadence.
    snapshot_time is the censoring boundary; pipelines that receive None
    resolve it to the last mined commit time.
    """

    project_name: str
    analysis_months: float
    lines_of_code: int
    release_cycle_days: float
    snapshot_time: datetime | None = None

    def __post_init__(self):
        if self.analysis_months <= 0:
            raise ValueError("analysis_months must be > 0")
        if self.lines_of_code <= 0:
            raise ValueError("lines_of_code must be > 0")
        if self.release_cycle_days <= 0:
            raise ValueError("release_cycle_days must be > 0")
        if self.snapshot_time is not None:
            self.snapshot_time = _as_utc(self.snapshot_time)


def build_records(
    ledger: EventLedger,
    refactor_policy: RefactorPolicy = RefactorPolicy.COALESCE_SAME_COMMIT,
) -> list[ToggleRecord]:
    """Fold an event stream into one record per toggle life.

    For each toggle name, events are paired chronologically: an addition opens
    a life and the next removal of that name closes the oldest open life.
    Under COALESCE_SAME_COMMIT a removal and addition of the same name in the
    same commit cancel out (the original addition date is retained).  A
    removal with no prior addition is anchored to the start of the mined range
    and flagged as an orphan, preserving removal counts when mining sub-ranges.
    Records with negative lifespans are retained and report ``anomalous``.
    """
    if not ledger.events:
        return []
    range_start = ledger.mined_range[0] if ledger.mined_range else ledger.events[0].timestamp

    by_name: dict[str, list[ToggleEvent]] = defaultdict(list)
    for event in ledger.events:
        by_name[event.toggle_name].append(event)

    records: list[ToggleRecord] = []
    for name, events in by_name.items():
        if refactor_policy is RefactorPolicy.COALESCE_SAME_COMMIT:
            events = _cancel_same_commit_pairs(events)
        occurrence = 0
        open_lives: deque[ToggleRecord] = deque()
        for event in events:
            if event.action is Action.ADDED:
                occurrence += 1
                open_lives.append(
                    ToggleRecord(name, added_at=event.timestamp, occurrence=occurrence)
                )
            else:
                if open_lives:
                    record = open_lives.popleft()
                    record.removed_at = event.timestamp
                    records.append(record)
                else:
                    occurrence += 1
                    log.warning(
                        "removal of %r at %s has no observed addition; "
                        "anchoring to mined range start %s",
                        name,
                        format_instant(event.timestamp),
                        format_instant(range_start),
                    )
                    records.append(
                        ToggleRecord(
                            name,
                            added_at=range_start,
                            removed_at=event.timestamp,
                            occurrence=occurrence,
                            orphan=True,
                        )
                    )
        records.extend(open_lives)

    records.sort(key=lambda r: (r.added_at, r.toggle_name, r.occurrence))
    return records


def _cancel_same_commit_pairs(events: list[ToggleEvent]) -> list[ToggleEvent]:
    """Drop one removed+added pair per commit for a single toggle name."""
    by_commit: dict[str, dict[Action, int]] = defaultdict(dict)
    for index, event in enumerate(events):
        by_commit[event.commit_id].setdefault(event.action, index)
    cancelled: set[int] = set()
    for actions in by_commit.values():
        if Action.ADDED in actions and Action.REMOVED in actions:
            cancelled.add(actions[Action.ADDED])
            cancelled.add(actions[Action.REMOVED])
    if not cancelled:
        return events
    return [e for i, e in enumerate(events) if i not in cancelled]
