"""The five benchmark metrics and the monthly/daily event time series.

All functions are pure.  Rates are per month of analysis period, density is
per thousand lines of code, and the normalized lifespan expresses the median
survival in release cycles so projects with different cadences compare on the
same scale.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Optional

from .ledger import Action, EventLedger, ProjectContext

log = logging.getLogger(__name__)

AVERAGE_MONTH_DAYS = 30.44  # average Gregorian month length, used only for inferred-T warnings

METRIC_IDS = ("churn", "net_accumulation", "cleanup_ratio", "density", "norm_lifespan")


def churn_rate(additions_total: int, removals_total: int, analysis_months: float) -> float:
    """Total toggle events per month: (additions + removals) / T."""
    if analysis_months <= 0:
        raise ValueError("analysis period must be > 0 months")
    return (additions_total + removals_total) / analysis_months


def net_accumulation(additions_total: int, removals_total: int, analysis_months: float) -> float:
    """Inventory growth per month: (additions - removals) / T; negative means net cleanup."""
    if analysis_months <= 0:
        raise ValueError("analysis period must be > 0 months")
    return (additions_total - removals_total) / analysis_months


def cleanup_ratio(additions_total: int, removals_total: int) -> float | None:
    """Fraction of added toggles eventually removed; None when nothing was added."""
    if additions_total <= 0:
        return None
    return removals_total / additions_total


def toggle_density(active_count: int, lines_of_code: int) -> float:
    """Active toggles per thousand lines of code."""
    if lines_of_code <= 0:
        raise ValueError("lines_of_code must be > 0")
    return active_count / lines_of_code * 1000.0


def normalized_lifespan(median_survival_days: float | None, release_cycle_days: float) -> float | None:
    """Median toggle survival expressed in release cycles; None without a median."""
    if release_cycle_days <= 0:
        raise ValueError("release_cycle_days must be > 0")
    if median_survival_days is None:
        return None
    return median_survival_days / release_cycle_days


@dataclass
class MetricInputs:
    """Echo of the raw quantities a MetricSet was computed from."""

    additions_total: int
    removals_total: int
    active_count: int
    analysis_months: float
    lines_of_code: int
    release_cycle_days: float
    median_survival_days: float | None

    def to_dict(self) -> dict:
        return {
            "additions_total": self.additions_total,
            "removals_total": self.removals_total,
            "active_count": self.active_count,
            "analysis_months": self.analysis_months,
            "lines_of_code": self.lines_of_code,
            "release_cycle_days": self.release_cycle_days,
            "median_survival_days": self.median_survival_days,
        }


@dataclass
class MetricSet:
    """The five computed benchmark values for one project."""

    project_name: str
    churn_rate: float
    net_accumulation: float
    cleanup_ratio: float | None
    toggle_density: float
    normalized_lifespan: float | None
    normalized_lifespan_reason: str | None = None  # why the value is absent
    inputs: MetricInputs | None = None
    snapshot_date: str | None = None  # ISO date of the censoring snapshot

    def values(self) -> dict[str, float | None]:
        """Metric values keyed by threshold-table metric id."""
        return {
            "churn": self.churn_rate,
            "net_accumulation": self.net_accumulation,
            "cleanup_ratio": self.cleanup_ratio,
            "density": self.toggle_density,
            "norm_lifespan": self.normalized_lifespan,
        }

    def to_dict(self) -> dict:
        data = {
            "project": self.project_name,
            "churn_rate": self.churn_rate,
            "net_accumulation": self.net_accumulation,
            "cleanup_ratio": self.cleanup_ratio,
            "toggle_density": self.toggle_density,
            "normalized_lifespan": self.normalized_lifespan,
        }
        if self.normalized_lifespan is None and self.normalized_lifespan_reason:
            data["normalized_lifespan_reason"] = self.normalized_lifespan_reason
        if self.snapshot_date is not None:
            data["snapshot_date"] = self.snapshot_date
        if self.inputs is not None:
            data["inputs"] = self.inputs.to_dict()
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "MetricSet":
        inputs = None
        if isinstance(data.get("inputs"), dict):
            raw = data["inputs"]
            inputs = MetricInputs(
                additions_total=raw.get("additions_total", 0),
                removals_total=raw.get("removals_total", 0),
                active_count=raw.get("active_count", 0),
                analysis_months=raw.get("analysis_months", 0.0),
                lines_of_code=raw.get("lines_of_code", 0),
                release_cycle_days=raw.get("release_cycle_days", 0.0),
                median_survival_days=raw.get("median_survival_days"),
            )
        return cls(
            project_name=data.get("project", ""),
            churn_rate=data["churn_rate"],
            net_accumulation=data["net_accumulation"],
            cleanup_ratio=data.get("cleanup_ratio"),
            toggle_density=data["toggle_density"],
            normalized_lifespan=data.get("normalized_lifespan"),
            normalized_lifespan_reason=data.get("normalized_lifespan_reason"),
            inputs=inputs,
            snapshot_date=data.get("snapshot_date"),
        )


def compute_metric_set(
    context: ProjectContext,
    additions_total: int,
    removals_total: int,
    active_count: int,
    median_survival_days: float | None,
    median_reason: str | None = None,
) -> MetricSet:
    """Assemble the full MetricSet for one project from aggregate inputs."""
    snapshot = context.snapshot_time.date().isoformat() if context.snapshot_time else None
    return MetricSet(
        project_name=context.project_name,
        churn_rate=churn_rate(additions_total, removals_total, context.analysis_months),
        net_accumulation=net_accumulation(additions_total, removals_total, context.analysis_months),
        cleanup_ratio=cleanup_ratio(additions_total, removals_total),
        toggle_density=toggle_density(active_count, context.lines_of_code),
        normalized_lifespan=normalized_lifespan(median_survival_days, context.release_cycle_days),
        normalized_lifespan_reason=median_reason if median_survival_days is None else None,
        inputs=MetricInputs(
            additions_total=additions_total,
            removals_total=removals_total,
            active_count=active_count,
            analysis_months=context.analysis_months,
            lines_of_code=context.lines_of_code,
            release_cycle_days=context.release_cycle_days,
            median_survival_days=median_survival_days,
        ),
        snapshot_date=snapshot,
    )


@dataclass
class MonthBucket:
    month: str  # "YYYY-MM", UTC calendar month
    additions: int
    removals: int


@dataclass
class DayPoint:
    day: date
    active_count: int


@dataclass
class TimeSeries:
    monthly: list[MonthBucket]
    daily_active: list[DayPoint]


def _month_key(ts: datetime) -> tuple[int, int]:
    return (ts.year, ts.month)


def _next_month(key: tuple[int, int]) -> tuple[int, int]:
    year, month = key
    return (year + 1, 1) if month == 12 else (year, month + 1)


def monthly_series(ledger: EventLedger) -> list[MonthBucket]:
    """Addition/removal counts per UTC calendar month, empty months included."""
    if not ledger.events:
        return []
    counts: dict[tuple[int, int], list[int]] = {}
    for event in ledger.events:
        bucket = counts.setdefault(_month_key(event.timestamp), [0, 0])
        bucket[0 if event.action is Action.ADDED else 1] += 1
    first = _month_key(ledger.events[0].timestamp)
    last = _month_key(ledger.events[-1].timestamp)
    series = []
    key = first
    while True:
        adds, removes = counts.get(key, [0, 0])
        series.append(MonthBucket(f"{key[0]:04d}-{key[1]:02d}", adds, removes))
        if key == last:
            break
        key = _next_month(key)
    return series


def active_series(ledger: EventLedger, snapshot: datetime | None = None) -> list[DayPoint]:
    """Cumulative active-toggle count per UTC day, first event through snapshot.

    The value for a day counts every addition minus every removal up to and
    including that day.  A value below zero signals removals without observed
    additions (sub-range mining); it is reported as-is with a warning.
    """
    if not ledger.events:
        return []
    per_day: dict[date, int] = {}
    for event in ledger.events:
        delta = 1 if event.action is Action.ADDED else -1
        day = event.timestamp.date()
        per_day[day] = per_day.get(day, 0) + delta
    start = ledger.events[0].timestamp.date()
    end = snapshot.astimezone(timezone.utc).date() if snapshot else ledger.events[-1].timestamp.date()
    if end < start:
        end = start
    series = []
    running = 0
    warned = False
    day = start
    while day <= end:
        running += per_day.get(day, 0)
        if running < 0 and not warned:
            log.warning(
                "active count fell below zero on %s; the ledger contains removals "
                "without observed additions",
                day.isoformat(),
            )
            warned = True
        series.append(DayPoint(day, running))
        day += timedelta(days=1)
    return series


def infer_analysis_months(ledger: EventLedger) -> float | None:
    """First-to-last event span in average-length months; None when empty."""
    if not ledger.events:
        return None
    span = ledger.events[-1].timestamp - ledger.events[0].timestamp
    return span.total_seconds() / 86400.0 / AVERAGE_MONTH_DAYS


def check_analysis_period(ledger: EventLedger, configured_months: float) -> Optional[str]:
    """Warning text when the configured T diverges >5% from the event span."""
    inferred = infer_analysis_months(ledger)
    if inferred is None or inferred <= 0:
        return None
    divergence = abs(inferred - configured_months) / configured_months
    if divergence > 0.05:
        return (
            f"configured analysis period T={configured_months:g} months diverges "
            f"{divergence:.0%} from the inferred event span of {inferred:.1f} months"
        )
    return None
