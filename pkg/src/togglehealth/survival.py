"""Kaplan-Meier survival estimation over toggle lifespans.

Removed toggles contribute event (death) times; toggles still active at the
snapshot contribute right-censored times, so the estimate is not biased by
inventory that simply has not been cleaned up yet.  Ties at one time point
are processed deaths-before-censorings, the standard product-limit
convention.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction

from .ledger import Status, ToggleRecord

log = logging.getLogger(__name__)


@dataclass
class CurveStep:
    t: float  # days
    survival: float
    at_risk: int
    deaths: int
    censored: int


@dataclass
class SurvivalCurve:
    steps: list[CurveStep] = field(default_factory=list)
    n_total: int = 0

    def to_csv(self) -> str:
        lines = ["t,survival,at_risk,deaths,censored"]
        for s in self.steps:
            lines.append(f"{s.t:.10g},{s.survival:.10g},{s.at_risk},{s.deaths},{s.censored}")
        return "\n".join(lines) + "\n"


def _partition_observations(
    records: list[ToggleRecord],
    censor_at: datetime,
    include_anomalous: bool,
) -> tuple[list[float], list[float]]:
    """Death times from removed records, censoring times from active ones.

    Anomalous (negative-lifespan) records are excluded by default; with
    ``include_anomalous`` they enter as deaths clamped at 0 days.
    """
    deaths: list[float] = []
    censorings: list[float] = []
    for record in records:
        if record.status is Status.REMOVED:
            span = record.lifespan_days
            if span < 0:
                if include_anomalous:
                    deaths.append(0.0)
                continue
            deaths.append(span)
        else:
            age = record.age_days(censor_at)
            if age < 0:
                raise ValueError(
                    f"active record {record.toggle_name!r} added after the censoring instant"
                )
            censorings.append(age)
    return deaths, censorings


def kaplan_meier(
    records: list[ToggleRecord],
    censor_at: datetime,
    include_anomalous: bool = False,
) -> SurvivalCurve:
    """Product-limit survival estimate over toggle lifespans.

    One step is emitted per distinct observed time (death or censoring);
    survival only drops at death times.
    """
    deaths, censorings = _partition_observations(records, censor_at, include_anomalous)
    n_total = len(deaths) + len(censorings)
    if n_total == 0:
        return SurvivalCurve(steps=[], n_total=0)

    death_counts: dict[float, int] = {}
    for t in deaths:
        death_counts[t] = death_counts.get(t, 0) + 1
    censor_counts: dict[float, int] = {}
    for t in censorings:
        censor_counts[t] = censor_counts.get(t, 0) + 1

    steps: list[CurveStep] = []
    # exact rational product so survival values that are exactly 1/2 stay
    # exactly 0.5 after float conversion (the median rule compares <= 0.5)
    survival = Fraction(1)
    at_risk = n_total
    for t in sorted(set(death_counts) | set(censor_counts)):
        d = death_counts.get(t, 0)
        c = censor_counts.get(t, 0)
        if d:
            survival *= 1 - Fraction(d, at_risk)
        steps.append(
            CurveStep(t=t, survival=float(survival), at_risk=at_risk, deaths=d, censored=c)
        )
        at_risk -= d + c
    return SurvivalCurve(steps=steps, n_total=n_total)


def median_survival(curve: SurvivalCurve) -> float | None:
    """Smallest step time with survival <= 0.5; None under heavy censoring."""
    for step in curve.steps:
        if step.survival <= 0.5:
            return step.t
    return None


@dataclass
class LifespanTiers:
    """Quartile classification of removed-toggle lifespans.

    temporary: lifespan < q1; long_lived: lifespan >= q3; intermediate
    otherwise.  Thresholds are None when no removals exist yet.
    """

    q1_days: float | None = None
    q3_days: float | None = None
    temporary: list[ToggleRecord] = field(default_factory=list)
    intermediate: list[ToggleRecord] = field(default_factory=list)
    long_lived: list[ToggleRecord] = field(default_factory=list)
    permanent: list["PermanentToggle"] = field(default_factory=list)
    status: str = "ok"  # or "no removals yet"

    def counts(self) -> dict[str, int]:
        return {
            "temporary": len(self.temporary),
            "intermediate": len(self.intermediate),
            "long_lived": len(self.long_lived),
        }


def classify_tiers(records: list[ToggleRecord]) -> LifespanTiers:
    """Partition removed records into temporary/intermediate/long-lived tiers.

    Quartiles are computed over non-anomalous removed lifespans with linear
    interpolation over the sorted sample (the common "inclusive" scheme),
    documented here because the choice moves the boundaries slightly.
    """
    removed = [
        r for r in records if r.status is Status.REMOVED and not r.anomalous
    ]
    if not removed:
        return LifespanTiers(status="no removals yet")
    spans = sorted(r.lifespan_days for r in removed)
    if len(spans) == 1:
        q1 = q3 = spans[0]
    else:
        quartiles = statistics.quantiles(spans, n=4, method="inclusive")
        q1, q3 = quartiles[0], quartiles[2]
    tiers = LifespanTiers(q1_days=q1, q3_days=q3)
    for record in removed:
        span = record.lifespan_days
        if span < q1:
            tiers.temporary.append(record)
        elif span >= q3:
            tiers.long_lived.append(record)
        else:
            tiers.intermediate.append(record)
    return tiers


@dataclass
class PermanentToggle:
    record: ToggleRecord
    age_days: float
    excess_days: float

    def to_dict(self) -> dict:
        return {
            "toggle": self.record.export_name,
            "added_at": self.record.added_at.date().isoformat(),
            "age_days": self.age_days,
            "excess_days": self.excess_days,
        }


@dataclass
class PermanentReport:
    threshold_days: float | None  # max observed removed lifespan
    flagged: list[PermanentToggle] = field(default_factory=list)
    status: str = "ok"  # or "threshold undefined"


def flag_permanent(records: list[ToggleRecord], censor_at: datetime) -> PermanentReport:
    """Active toggles older than every lifespan ever observed for a removal.

    The threshold M is the maximum non-anomalous removed lifespan; an active
    record is flagged when its age strictly exceeds M.  Result is sorted by
    excess descending, so the most overdue toggle comes first.
    """
    removed_spans = [
        r.lifespan_days for r in records if r.status is Status.REMOVED and not r.anomalous
    ]
    if not removed_spans:
        return PermanentReport(threshold_days=None, status="threshold undefined")
    threshold = max(removed_spans)
    flagged = []
    for record in records:
        if record.status is not Status.ACTIVE:
            continue
        age = record.age_days(censor_at)
        if age > threshold:
            flagged.append(PermanentToggle(record, age_days=age, excess_days=age - threshold))
    flagged.sort(key=lambda p: (-p.excess_days, p.record.toggle_name))
    return PermanentReport(threshold_days=threshold, flagged=flagged)
