"""togglehealth: mine feature-toggle lifecycles from git history and assess their health."""

__version__ = "0.1.0"

from .assessment import (
    Assessment,
    ThresholdTable,
    Zone,
    assess_project,
    classify_zone,
    compare_projects,
    default_thresholds,
)
from .ledger import (
    Action,
    EventLedger,
    ProjectContext,
    RefactorPolicy,
    Status,
    ToggleEvent,
    ToggleRecord,
    build_records,
)
from .metrics import (
    MetricSet,
    TimeSeries,
    active_series,
    churn_rate,
    cleanup_ratio,
    compute_metric_set,
    monthly_series,
    net_accumulation,
    normalized_lifespan,
    toggle_density,
)
from .diffparse import extract_declaration_events
from .mining import (
    ExtractorConfig,
    ExtractorMode,
    detect_bulk_events,
    extract_file_lifecycle_events,
    mine_repository,
)
from .survival import (
    LifespanTiers,
    SurvivalCurve,
    classify_tiers,
    flag_permanent,
    kaplan_meier,
    median_survival,
)

__all__ = [
    "Action",
    "Assessment",
    "EventLedger",
    "ExtractorConfig",
    "ExtractorMode",
    "LifespanTiers",
    "MetricSet",
    "ProjectContext",
    "RefactorPolicy",
    "Status",
    "SurvivalCurve",
    "ThresholdTable",
    "TimeSeries",
    "ToggleEvent",
    "ToggleRecord",
    "Zone",
    "active_series",
    "assess_project",
    "build_records",
    "churn_rate",
    "classify_tiers",
    "classify_zone",
    "cleanup_ratio",
    "compare_projects",
    "compute_metric_set",
    "default_thresholds",
    "detect_bulk_events",
    "extract_declaration_events",
    "extract_file_lifecycle_events",
    "flag_permanent",
    "kaplan_meier",
    "median_survival",
    "mine_repository",
    "monthly_series",
    "net_accumulation",
    "normalized_lifespan",
    "toggle_density",
]
