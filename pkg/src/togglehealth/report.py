"""Full analysis pipeline and report artifact writing.

``analyze`` runs ledger -> records -> metrics -> survival -> assessment in
memory; ``write_artifacts`` materializes every output file atomically
(write to a temp sibling, then rename) so a crashed run never leaves a
half-written artifact behind.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .assessment import (
    METRIC_LABELS,
    Assessment,
    ThresholdTable,
    assess_project,
    default_thresholds,
)
from .config import Policies
from .ledger import (
    EventLedger,
    ProjectContext,
    Status,
    ToggleRecord,
    build_records,
    format_instant,
    records_to_json,
)
from .metrics import (
    DayPoint,
    MetricSet,
    MonthBucket,
    active_series,
    check_analysis_period,
    compute_metric_set,
    infer_analysis_months,
    monthly_series,
)
from .mining import BulkCommit, detect_bulk_events
from .survival import (
    LifespanTiers,
    PermanentReport,
    SurvivalCurve,
    classify_tiers,
    flag_permanent,
    kaplan_meier,
    median_survival,
)

log = logging.getLogger(__name__)

FIGURE_FILES = {
    "monthly": "monthly_events.png",
    "active": "active_toggles.png",
    "lifespans": "lifespan_histogram.png",
    "survival": "survival_curve.png",
}


@dataclass
class AnalysisResult:
    ledger: EventLedger
    context: ProjectContext
    snapshot: datetime | None
    records: list[ToggleRecord] = field(default_factory=list)
    curve: SurvivalCurve = field(default_factory=SurvivalCurve)
    median_days: float | None = None
    tiers: LifespanTiers = field(default_factory=LifespanTiers)
    permanent: PermanentReport = field(default_factory=lambda: PermanentReport(None))
    monthly: list[MonthBucket] = field(default_factory=list)
    daily: list[DayPoint] = field(default_factory=list)
    bulk: list[BulkCommit] = field(default_factory=list)
    metrics: MetricSet | None = None
    assessment: Assessment | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def active_count(self) -> int:
        return sum(1 for r in self.records if r.status is Status.ACTIVE)


def resolve_snapshot(ledger: EventLedger, context: ProjectContext) -> datetime | None:
    if context.snapshot_time is not None:
        return context.snapshot_time
    if ledger.mined_range is not None:
        return ledger.mined_range[1]
    if ledger.events:
        return ledger.events[-1].timestamp
    return None


def analyze(
    ledger: EventLedger,
    context: ProjectContext,
    policies: Policies,
    thresholds: ThresholdTable | None = None,
) -> AnalysisResult:
    """Run the full pipeline over a ledger; tolerates an empty ledger."""
    if thresholds is None:
        thresholds = default_thresholds()
    snapshot = resolve_snapshot(ledger, context)
    result = AnalysisResult(ledger=ledger, context=context, snapshot=snapshot)
    if not ledger.events:
        result.warnings.append("ledger is empty: metrics are not assessable")
        return result

    result.records = build_records(ledger, policies.refactor_policy)
    result.monthly = monthly_series(ledger)
    result.daily = active_series(ledger, snapshot=snapshot)
    result.bulk = detect_bulk_events(ledger, policies.bulk_threshold)

    result.curve = kaplan_meier(
        result.records, censor_at=snapshot, include_anomalous=policies.include_anomalous
    )
    result.median_days = median_survival(result.curve)
    result.tiers = classify_tiers(result.records)
    result.permanent = flag_permanent(result.records, censor_at=snapshot)
    result.tiers.permanent = result.permanent.flagged

    median_reason = None
    if result.median_days is None:
        median_reason = (
            "survival never reaches 0.5 within the observed window (heavy censoring)"
            if result.curve.n_total
            else "no lifespan observations"
        )
    result.metrics = compute_metric_set(
        context,
        additions_total=ledger.additions_total,
        removals_total=ledger.removals_total,
        active_count=result.active_count,
        median_survival_days=result.median_days,
        median_reason=median_reason,
    )
    result.assessment = assess_project(result.metrics, thresholds)

    orphans = [r for r in result.records if r.orphan]
    if orphans:
        names = ", ".join(r.export_name for r in orphans[:10])
        result.warnings.append(
            f"{len(orphans)} removal(s) without an observed addition were anchored "
            f"to the mined range start: {names}"
        )
    anomalous = [r for r in result.records if r.anomalous]
    if anomalous:
        kept = "included (clamped at 0)" if policies.include_anomalous else "excluded"
        result.warnings.append(
            f"{len(anomalous)} record(s) have negative lifespans; {kept} in survival analysis"
        )
    if any(p.active_count < 0 for p in result.daily):
        result.warnings.append("active-toggle series drops below zero (orphan removals)")
    period_warning = check_analysis_period(ledger, context.analysis_months)
    if period_warning:
        result.warnings.append(period_warning)
    return result


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as tmp:
            tmp.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def timeseries_csv(monthly: list[MonthBucket], daily: list[DayPoint]) -> str:
    lines = ["series,date,additions,removals,active_count"]
    for bucket in monthly:
        lines.append(f"monthly,{bucket.month},{bucket.additions},{bucket.removals},")
    for point in daily:
        lines.append(f"daily_active,{point.day.isoformat()},,,{point.active_count}")
    return "\n".join(lines) + "\n"


def tiers_json(tiers: LifespanTiers) -> str:
    payload = {
        "status": tiers.status,
        "q1_days": tiers.q1_days,
        "q3_days": tiers.q3_days,
        "counts": tiers.counts(),
        "temporary": [r.to_dict() for r in tiers.temporary],
        "intermediate": [r.to_dict() for r in tiers.intermediate],
        "long_lived": [r.to_dict() for r in tiers.long_lived],
    }
    return json.dumps(payload, indent=2) + "\n"


def permanent_json(report: PermanentReport) -> str:
    payload = {
        "status": report.status,
        "max_removed_lifespan_days": report.threshold_days,
        "flagged": [p.to_dict() for p in report.flagged],
    }
    return json.dumps(payload, indent=2) + "\n"


def empty_metrics_json(context: ProjectContext) -> str:
    payload = {
        "project": context.project_name,
        "churn_rate": None,
        "net_accumulation": None,
        "cleanup_ratio": None,
        "toggle_density": None,
        "normalized_lifespan": None,
        "reason": "empty ledger",
    }
    return json.dumps(payload, indent=2) + "\n"


def _fmt(value: float | None, digits: int = 4, reason: str = "") -> str:
    if value is None:
        return f"n/a ({reason})" if reason else "n/a"
    return f"{value:.{digits}g}"


def render_markdown(result: AnalysisResult, with_figures: bool = True) -> str:
    """Human-readable report: metrics with zones, tiers, permanent toggles, bulk commits."""
    context = result.context
    ledger = result.ledger
    lines = [f"# Toggle health report: {context.project_name}", ""]

    lines.append("## Summary")
    lines.append("")
    if ledger.mined_range:
        lines.append(
            f"- Mined range: {format_instant(ledger.mined_range[0])} to "
            f"{format_instant(ledger.mined_range[1])}"
        )
    if result.snapshot:
        lines.append(f"- Snapshot (censoring boundary): {format_instant(result.snapshot)}")
    lines.append(f"- Events: {ledger.additions_total} additions, {ledger.removals_total} removals")
    lines.append(f"- Active toggles at snapshot: {result.active_count}")
    lines.append(
        f"- Denominators: T = {context.analysis_months:g} months, "
        f"L = {context.lines_of_code:,} LoC, release cycle = {context.release_cycle_days:g} days"
    )
    inferred = infer_analysis_months(ledger)
    if inferred is not None:
        lines.append(
            f"- Analysis period inferred from the event span: {inferred:.1f} months "
            f"(configured: {context.analysis_months:g})"
        )
    lines.append("")

    lines.append("## Benchmark metrics")
    lines.append("")
    lines.append("| Metric | Value | Zone | Reading |")
    lines.append("|---|---|---|---|")
    if result.metrics is None or result.assessment is None:
        for label in (
            "Churn rate (events/month)",
            "Net accumulation (toggles/month)",
            "Cleanup ratio",
            "Toggle density (per kLoC)",
            "Normalized lifespan (release cycles)",
        ):
            lines.append(f"| {label} | n/a (empty ledger) | n/a | n/a |")
    else:
        reasons = {"norm_lifespan": result.metrics.normalized_lifespan_reason or "undefined"}
        for metric_id, ma in result.assessment.metrics.items():
            value = _fmt(ma.value, reason=reasons.get(metric_id, "undefined"))
            lines.append(f"| {METRIC_LABELS[metric_id]} | {value} | {ma.zone} | {ma.description} |")
    lines.append("")

    if result.assessment is not None:
        lines.append(f"**Profile: {result.assessment.profile.value}** — {result.assessment.rationale}")
        lines.append("")

    lines.append("## Lifespan tiers")
    lines.append("")
    if result.tiers.q1_days is None:
        lines.append(f"Not available: {result.tiers.status}.")
    else:
        counts = result.tiers.counts()
        lines.append(
            f"Quartile thresholds over removed lifespans: q1 = {result.tiers.q1_days:.1f} d, "
            f"q3 = {result.tiers.q3_days:.1f} d."
        )
        lines.append("")
        lines.append(f"- temporary (< q1): {counts['temporary']}")
        lines.append(f"- intermediate (q1..q3): {counts['intermediate']}")
        lines.append(f"- long-lived (>= q3): {counts['long_lived']}")
    lines.append("")

    lines.append("## De facto permanent toggles")
    lines.append("")
    if result.permanent.threshold_days is None:
        lines.append(f"Not available: {result.permanent.status}.")
    elif not result.permanent.flagged:
        lines.append(
            f"None: no active toggle exceeds the maximum removed lifespan "
            f"({result.permanent.threshold_days:.0f} days)."
        )
    else:
        lines.append(
            f"Active toggles older than the maximum removed lifespan "
            f"({result.permanent.threshold_days:.0f} days):"
        )
        lines.append("")
        lines.append("| Toggle | Added | Age (days) | Excess (days) |")
        lines.append("|---|---|---|---|")
        for item in result.permanent.flagged:
            lines.append(
                f"| {item.record.export_name} | {item.record.added_at.date().isoformat()} "
                f"| {item.age_days:.0f} | {item.excess_days:.0f} |"
            )
    lines.append("")

    if result.bulk:
        lines.append("## Bulk commits")
        lines.append("")
        lines.append("Commits with unusually many toggle events (annotation only, never dropped):")
        lines.append("")
        lines.append("| Commit | Date | Additions | Removals |")
        lines.append("|---|---|---|---|")
        for bulk in result.bulk:
            lines.append(
                f"| {bulk.commit_id[:12]} | {bulk.timestamp.date().isoformat()} "
                f"| {bulk.add_count} | {bulk.remove_count} |"
            )
        lines.append("")

    if result.warnings:
        lines.append("## Warnings")
        lines.append("")
        for warning in result.warnings:
            lines.append(f"- {warning}")
        lines.append("")

    if with_figures and result.ledger.events:
        lines.append("## Figures")
        lines.append("")
        for name in FIGURE_FILES.values():
            lines.append(f"![{name}]({name})")
        lines.append("")

    return "\n".join(lines)


def write_artifacts(
    result: AnalysisResult,
    out_dir: Path,
    with_figures: bool = True,
) -> dict[str, Path]:
    """Write every report artifact; returns name -> path of what was written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    metrics_path = out_dir / "metrics.json"
    if result.metrics is not None:
        atomic_write_text(metrics_path, result.metrics.to_json())
    else:
        atomic_write_text(metrics_path, empty_metrics_json(result.context))
    written["metrics"] = metrics_path

    survival_path = out_dir / "survival.csv"
    atomic_write_text(survival_path, result.curve.to_csv())
    written["survival"] = survival_path

    tiers_path = out_dir / "tiers.json"
    atomic_write_text(tiers_path, tiers_json(result.tiers))
    written["tiers"] = tiers_path

    permanent_path = out_dir / "permanent.json"
    atomic_write_text(permanent_path, permanent_json(result.permanent))
    written["permanent"] = permanent_path

    records_path = out_dir / "records.json"
    atomic_write_text(records_path, records_to_json(result.records))
    written["records"] = records_path

    timeseries_path = out_dir / "timeseries.csv"
    atomic_write_text(timeseries_path, timeseries_csv(result.monthly, result.daily))
    written["timeseries"] = timeseries_path

    if with_figures and result.ledger.events:
        from . import figures  # deferred: matplotlib import is slow and assess/mine never need it

        figures.monthly_events_figure(result.monthly, out_dir / FIGURE_FILES["monthly"])
        figures.active_toggles_figure(result.daily, out_dir / FIGURE_FILES["active"])
        figures.lifespan_histogram_figure(result.tiers, out_dir / FIGURE_FILES["lifespans"])
        figures.survival_curve_figure(
            result.curve, out_dir / FIGURE_FILES["survival"], median=result.median_days
        )
        for key, name in FIGURE_FILES.items():
            written[f"figure_{key}"] = out_dir / name

    report_path = out_dir / "report.md"
    atomic_write_text(report_path, render_markdown(result, with_figures=with_figures))
    written["report"] = report_path
    return written
