"""Figure rendering for the report pipeline (headless, files only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.dates as mdates
import matplotlib.pyplot as plt

from .metrics import DayPoint, MonthBucket
from .survival import LifespanTiers, SurvivalCurve

ADD_COLOR = "#2b7bba"
REMOVE_COLOR = "#d1495b"
ACTIVE_COLOR = "#1b7a3d"

TIER_COLORS = {"temporary": "#3a9d5d", "intermediate": "#2b7bba", "long_lived": "#e08a1e"}


def _finish(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def monthly_events_figure(monthly: list[MonthBucket], path: Path) -> Path:
    """Added vs removed toggles per calendar month."""
    fig, ax = plt.subplots(figsize=(9, 4))
    months = [m.month for m in monthly]
    ax.plot(months, [m.additions for m in monthly], label="added", color=ADD_COLOR, lw=1.4)
    ax.plot(months, [m.removals for m in monthly], label="removed", color=REMOVE_COLOR, lw=1.4)
    step = max(1, len(months) // 12)
    ax.set_xticks(range(0, len(months), step))
    ax.tick_params(axis="x", rotation=45, labelsize=8)
    ax.set_ylabel("toggles / month")
    ax.set_title("Monthly toggle additions and removals")
    ax.legend()
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def active_toggles_figure(daily: list[DayPoint], path: Path) -> Path:
    """Cumulative active-toggle count per day."""
    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(
        [p.day for p in daily],
        [p.active_count for p in daily],
        color=ACTIVE_COLOR,
        lw=1.4,
    )
    ax.xaxis.set_major_formatter(mdates.DateFormatter("%Y-%m"))
    ax.tick_params(axis="x", rotation=45, labelsize=8)
    ax.set_ylabel("active toggles")
    ax.set_title("Active toggles over time")
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def lifespan_histogram_figure(tiers: LifespanTiers, path: Path) -> Path:
    """Removed-toggle lifespan distribution with quartile tier boundaries."""
    fig, ax = plt.subplots(figsize=(9, 4))
    for tier_name, records in (
        ("temporary", tiers.temporary),
        ("intermediate", tiers.intermediate),
        ("long_lived", tiers.long_lived),
    ):
        spans = [r.lifespan_days for r in records]
        if spans:
            ax.hist(spans, bins=30, label=tier_name, color=TIER_COLORS[tier_name], alpha=0.75)
    if tiers.q1_days is not None:
        ax.axvline(tiers.q1_days, color="black", ls="--", lw=1, label=f"q1 = {tiers.q1_days:.0f} d")
    if tiers.q3_days is not None:
        ax.axvline(tiers.q3_days, color="black", ls=":", lw=1, label=f"q3 = {tiers.q3_days:.0f} d")
    ax.set_xlabel("lifespan (days)")
    ax.set_ylabel("removed toggles")
    ax.set_title("Lifespan distribution of removed toggles")
    ax.legend()
    return _finish(fig, path)


def survival_curve_figure(curve: SurvivalCurve, path: Path, median: float | None = None) -> Path:
    """Step survival curve; censoring times drawn as vertical ticks."""
    fig, ax = plt.subplots(figsize=(9, 4))
    times = [0.0] + [s.t for s in curve.steps]
    probs = [1.0] + [s.survival for s in curve.steps]
    ax.step(times, probs, where="post", color=ADD_COLOR, lw=1.6)
    censor_t = [s.t for s in curve.steps if s.censored > 0]
    censor_p = [s.survival for s in curve.steps if s.censored > 0]
    if censor_t:
        ax.plot(censor_t, censor_p, "|", color="black", markersize=7, label="censored")
    if median is not None:
        ax.axvline(median, color="gray", ls="--", lw=1, label=f"median = {median:.0f} d")
        ax.axhline(0.5, color="gray", ls=":", lw=0.8)
    ax.set_xlabel("days since addition")
    ax.set_ylabel("survival probability")
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Toggle survival (n = {curve.n_total})")
    if censor_t or median is not None:
        ax.legend()
    ax.grid(alpha=0.3)
    return _finish(fig, path)
