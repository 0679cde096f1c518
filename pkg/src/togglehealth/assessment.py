"""Threshold zones and project health profiles for the five benchmark metrics.

Zones are half-open intervals [lower, upper) with the printed bound landing
on the inclusive side of the row it labels (a cleanup ratio of exactly 0.85
is Healthy, a churn of exactly 100 is High).  Each metric's zones tile the
whole real line: the outermost zones are unbounded, so any finite value maps
to exactly one zone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .metrics import METRIC_IDS, MetricSet

METRIC_LABELS = {
    "churn": "Churn rate (events/month)",
    "net_accumulation": "Net accumulation (toggles/month)",
    "cleanup_ratio": "Cleanup ratio",
    "density": "Toggle density (per kLoC)",
    "norm_lifespan": "Normalized lifespan (release cycles)",
}

NOT_ASSESSABLE = "not assessable"


@dataclass(frozen=True)
class Zone:
    name: str
    lower: float | None  # inclusive; None = unbounded below
    upper: float | None  # exclusive; None = unbounded above
    description: str

    def contains(self, value: float) -> bool:
        if self.lower is not None and value < self.lower:
            return False
        if self.upper is not None and value >= self.upper:
            return False
        return True


class ThresholdError(ValueError):
    """Threshold table violates contiguity or coverage."""


@dataclass
class ThresholdTable:
    """Ordered zones per metric id, ascending by bound."""

    zones: dict[str, list[Zone]]

    def __post_init__(self):
        for metric_id, zone_list in self.zones.items():
            if not zone_list:
                raise ThresholdError(f"metric {metric_id!r} has no zones")
            ordered = sorted(
                zone_list, key=lambda z: float("-inf") if z.lower is None else z.lower
            )
            if ordered[0].lower is not None or ordered[-1].upper is not None:
                raise ThresholdError(f"zones for {metric_id!r} must be unbounded at both ends")
            for left, right in zip(ordered, ordered[1:]):
                if left.upper is None or right.lower is None or left.upper != right.lower:
                    raise ThresholdError(
                        f"zones for {metric_id!r} must be contiguous and non-overlapping"
                    )
            self.zones[metric_id] = ordered

    def classify(self, metric_id: str, value: float) -> Zone:
        if metric_id not in self.zones:
            raise KeyError(f"unknown metric id: {metric_id!r}")
        for zone in self.zones[metric_id]:
            if zone.contains(value):
                return zone
        raise ThresholdError(f"no zone contains {value!r} for {metric_id!r}")  # unreachable

    def to_json(self) -> str:
        payload = {
            metric_id: [
                {
                    "zone": z.name,
                    "min": z.lower,
                    "max": z.upper,
                    "description": z.description,
                }
                for z in zone_list
            ]
            for metric_id, zone_list in self.zones.items()
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ThresholdTable":
        raw = json.loads(text)
        zones = {
            metric_id: [
                Zone(
                    name=item["zone"],
                    lower=item["min"],
                    upper=item["max"],
                    description=item.get("description", ""),
                )
                for item in items
            ]
            for metric_id, items in raw.items()
        }
        return cls(zones=zones)

    @classmethod
    def load(cls, path: Path | str) -> "ThresholdTable":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def default_thresholds() -> ThresholdTable:
    """The built-in interpretation table calibrated on the two baselines."""
    return ThresholdTable(
        zones={
            "churn": [
                Zone("Low", None, 15.0, "deliberate changes"),
                Zone("Moderate", 15.0, 100.0, "balanced activity"),
                Zone("High", 100.0, None, "rapid iteration"),
            ],
            "net_accumulation": [
                Zone("Sustainable", None, 2.0, "cleanup keeps pace"),
                Zone("Warning", 2.0, 5.0, "gradual debt"),
                Zone("Critical", 5.0, None, "one-in-one-out policy needed"),
            ],
            "cleanup_ratio": [
                Zone("Critical", None, 0.70, "significant debt"),
                Zone("Warning", 0.70, 0.85, "potential debt"),
                Zone("Healthy", 0.85, None, "most added toggles removed"),
            ],
            "density": [
                Zone("Conservative", None, 0.02, "low toggle footprint"),
                Zone("Moderate", 0.02, 0.10, "typical density"),
                Zone("Aggressive", 0.10, None, "strict cleanup needed"),
            ],
            "norm_lifespan": [
                Zone("Short-lived", None, 3.0, "rapid cleanup"),
                Zone("Moderate", 3.0, 8.0, "typical lifecycle"),
                Zone("Long-lived", 8.0, None, "extended maintenance"),
            ],
        }
    )


def classify_zone(table: ThresholdTable, metric_id: str, value: float | None) -> tuple[str, str]:
    """(zone name, description) for a value; the not-assessable marker for None."""
    if value is None:
        return (NOT_ASSESSABLE, "metric value undefined")
    zone = table.classify(metric_id, value)
    return (zone.name, zone.description)


class Profile(Enum):
    CONSERVATIVE = "Conservative"
    AGGRESSIVE = "Aggressive"
    MIXED = "Mixed"


@dataclass
class MetricAssessment:
    value: float | None
    zone: str
    description: str


@dataclass
class Assessment:
    project_name: str
    metrics: dict[str, MetricAssessment]
    profile: Profile
    rationale: str

    def to_dict(self) -> dict:
        return {
            "project": self.project_name,
            "metrics": {
                metric_id: {
                    "value": ma.value,
                    "zone": ma.zone,
                    "description": ma.description,
                }
                for metric_id, ma in self.metrics.items()
            },
            "profile": self.profile.value,
            "rationale": self.rationale,
        }


# Metrics whose zone must match for each archetype; order drives rationale text.
_CONSERVATIVE_PATTERN = {"churn": ("Low",), "density": ("Conservative",), "net_accumulation": ("Sustainable",)}
_AGGRESSIVE_PATTERN = {"churn": ("High",), "density": ("Moderate", "Aggressive")}
_CONCERN_ZONES = {"Warning", "Critical"}


def assess_project(metrics: MetricSet, table: ThresholdTable | None = None) -> Assessment:
    """Zone every metric and derive a Conservative/Aggressive/Mixed profile.

    The archetype rule: Conservative needs Low churn, Conservative density and
    Sustainable accumulation; Aggressive needs High churn with at least
    Moderate density.  A project with no toggle activity at all (zero churn)
    is Mixed with an insufficient-activity rationale.  Metrics sitting in a
    Warning or Critical zone are always named, whatever the profile.
    """
    if table is None:
        table = default_thresholds()
    values = metrics.values()
    assessed = {}
    for metric_id in METRIC_IDS:
        zone_name, description = classify_zone(table, metric_id, values[metric_id])
        assessed[metric_id] = MetricAssessment(values[metric_id], zone_name, description)

    concerns = [
        f"{metric_id} in {ma.zone}"
        for metric_id, ma in assessed.items()
        if ma.zone in _CONCERN_ZONES
    ]

    if not values["churn"]:
        profile = Profile.MIXED
        rationale = "insufficient activity: no toggle events in the analysis period"
    elif _matches(assessed, _CONSERVATIVE_PATTERN):
        profile = Profile.CONSERVATIVE
        rationale = "low churn, low density, sustainable accumulation"
    elif _matches(assessed, _AGGRESSIVE_PATTERN):
        profile = Profile.AGGRESSIVE
        rationale = "high churn with a dense, fast-moving toggle inventory"
    else:
        profile = Profile.MIXED
        rationale = "no single archetype fits: " + "; ".join(
            _mismatches(assessed, _CONSERVATIVE_PATTERN, "conservative")
            + _mismatches(assessed, _AGGRESSIVE_PATTERN, "aggressive")
        )
    if concerns:
        rationale += " (" + ", ".join(concerns) + ")"
    return Assessment(
        project_name=metrics.project_name,
        metrics=assessed,
        profile=profile,
        rationale=rationale,
    )


def _matches(assessed: dict[str, MetricAssessment], pattern: dict[str, tuple[str, ...]]) -> bool:
    return all(assessed[mid].zone in allowed for mid, allowed in pattern.items())


def _mismatches(
    assessed: dict[str, MetricAssessment],
    pattern: dict[str, tuple[str, ...]],
    label: str,
) -> list[str]:
    off = [
        f"{mid}={assessed[mid].zone}"
        for mid, allowed in pattern.items()
        if assessed[mid].zone not in allowed
    ]
    if not off:
        return []
    return [f"{label} blocked by " + ", ".join(off)]


def compare_projects(assessments: list[Assessment]) -> str:
    """Markdown table aligning per-metric zones across projects."""
    if not assessments:
        raise ValueError("at least one assessment required")
    names = []
    seen: dict[str, int] = {}
    for a in assessments:
        count = seen.get(a.project_name, 0) + 1
        seen[a.project_name] = count
        names.append(a.project_name if count == 1 else f"{a.project_name}#{count}")

    header = "| Metric | " + " | ".join(names) + " |"
    divider = "|---" * (len(names) + 1) + "|"
    rows = [header, divider]
    for metric_id in METRIC_IDS:
        cells = []
        for a in assessments:
            ma = a.metrics[metric_id]
            if ma.value is None:
                cells.append("n/a")
            else:
                cells.append(f"{ma.value:.4g} ({ma.zone})")
        rows.append(f"| {METRIC_LABELS[metric_id]} | " + " | ".join(cells) + " |")
    profile_row = ["| Profile | " + " | ".join(a.profile.value for a in assessments) + " |"]
    return "\n".join(rows + profile_row) + "\n"
