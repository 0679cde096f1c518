"""Command-line driver: mine -> report -> assess -> export-community.

The pipeline is file-mediated so each stage can also be fed hand-built
inputs: ``mine`` writes events.jsonl, ``report`` reads it and writes the
analysis artifacts, ``assess`` classifies a metrics file or five inline
values, ``export-community`` appends benchmark rows to a shared CSV.

Exit codes: 0 ok, 1 usage or configuration error, 2 environment/IO error.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import sys
from pathlib import Path

import click

from . import __version__
from .assessment import NOT_ASSESSABLE, ThresholdTable, assess_project, default_thresholds
from .config import (
    PRESET_NAMES,
    ConfigError,
    RunConfig,
    load_config_file,
    load_preset,
    validate_for_mining,
)
from .ledger import EventLedger, LedgerFormatError, RefactorPolicy, format_instant, parse_instant
from .metrics import MetricSet
from .mining import MiningError, detect_bulk_events, mine_repository
from .report import analyze, atomic_write_text, write_artifacts

log = logging.getLogger(__name__)

COMMUNITY_HEADER = (
    "project,churn_rate,net_accumulation,cleanup_ratio,"
    "toggle_density,normalized_lifespan,snapshot_date"
)


class EnvironmentIOError(click.ClickException):
    exit_code = 2


def _fail_config(message: str) -> None:
    raise click.ClickException(message)  # exit code 1


@click.group()
@click.version_option(version=__version__, prog_name="togglehealth")
def cli() -> None:
    """Mine feature-toggle lifecycles from git history and assess their health."""


def _build_run_config(
    config_path: str | None,
    preset: str | None,
    repo: str | None,
    branch: str | None,
    since: str | None,
    until: str | None,
    out: str | None,
    refactor_policy: str | None = None,
    include_anomalous: bool | None = None,
    bulk_threshold: int | None = None,
) -> RunConfig:
    cfg = RunConfig()
    if preset:
        cfg = load_preset(preset, base=cfg)
    if config_path:
        cfg = load_config_file(config_path, base=cfg)
    if repo:
        cfg.repo_path = Path(repo)
    if branch:
        cfg.extractor.branch = branch
    try:
        if since:
            cfg.since = parse_instant(since)
        if until:
            cfg.until = parse_instant(until)
    except ValueError as exc:
        raise ConfigError(f"bad --since/--until value: {exc}") from exc
    if out:
        cfg.output_dir = Path(out)
    if refactor_policy:
        cfg.policies.refactor_policy = RefactorPolicy(refactor_policy)
    if include_anomalous:
        cfg.policies.include_anomalous = True
    if bulk_threshold is not None:
        if bulk_threshold < 1:
            raise ConfigError("--bulk-threshold must be >= 1")
        cfg.policies.bulk_threshold = bulk_threshold
    cfg.check_window()
    return cfg


_shared_options = [
    click.option("--config", "config_path", type=click.Path(), help="TOML run configuration."),
    click.option("--preset", type=click.Choice(PRESET_NAMES), help="Shipped extraction preset."),
    click.option("--out", type=click.Path(), help="Output directory."),
]


def _apply(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func

    return wrap


@cli.command("mine")
@_apply(_shared_options)
@click.option("--repo", type=click.Path(), help="Path to a local git clone.")
@click.option("--branch", help="Branch or revision to walk.")
@click.option("--since", help="Earliest committer time to include (ISO-8601).")
@click.option("--until", help="Latest committer time to include (ISO-8601).")
@click.option("--bulk-threshold", type=int, default=None, help="Events per commit flagged as bulk.")
def cmd_mine(config_path, preset, out, repo, branch, since, until, bulk_threshold):
    """Walk a repository's history and write events.jsonl."""
    cfg = _build_run_config(config_path, preset, repo, branch, since, until, out,
                            bulk_threshold=bulk_threshold)
    validate_for_mining(cfg)
    repo_path = cfg.require_repo()
    label = cfg.project.project_name if cfg.project else None
    ledger = mine_repository(
        repo_path, cfg.extractor, since=cfg.since, until=cfg.until, label=label
    )

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    events_path = cfg.output_dir / "events.jsonl"
    atomic_write_text(events_path, ledger.to_jsonl())

    bulk = detect_bulk_events(ledger, cfg.policies.bulk_threshold)
    click.echo(f"mined {ledger.repo_label}: {len(ledger.events)} events "
               f"({ledger.additions_total} added, {ledger.removals_total} removed)")
    if ledger.mined_range:
        click.echo(
            f"range: {format_instant(ledger.mined_range[0])} "
            f"to {format_instant(ledger.mined_range[1])}"
        )
    if bulk:
        click.echo(f"bulk commits (threshold {cfg.policies.bulk_threshold}):")
        for item in bulk:
            click.echo(
                f"  {item.commit_id[:12]} {item.timestamp.date().isoformat()} "
                f"+{item.add_count} -{item.remove_count}"
            )
    click.echo(f"wrote {events_path}")


@cli.command("report")
@_apply(_shared_options)
@click.option("--events", "events_path", type=click.Path(), help="Events JSONL (default: OUT/events.jsonl).")
@click.option("--thresholds", "thresholds_path", type=click.Path(), help="Threshold zone JSON.")
@click.option(
    "--refactor-policy",
    type=click.Choice([p.value for p in RefactorPolicy]),
    default=None,
    help="Same-commit remove+add handling.",
)
@click.option("--include-anomalous", is_flag=True, default=False,
              help="Keep negative-lifespan records in survival analysis (clamped at 0).")
@click.option("--bulk-threshold", type=int, default=None, help="Events per commit flagged as bulk.")
@click.option("--no-figures", is_flag=True, default=False, help="Skip figure rendering.")
def cmd_report(config_path, preset, out, events_path, thresholds_path,
               refactor_policy, include_anomalous, bulk_threshold, no_figures):
    """Analyze a mined event ledger and write all report artifacts."""
    cfg = _build_run_config(config_path, preset, None, None, None, None, out,
                            refactor_policy=refactor_policy,
                            include_anomalous=include_anomalous,
                            bulk_threshold=bulk_threshold)
    context = cfg.require_project()
    path = Path(events_path) if events_path else cfg.output_dir / "events.jsonl"
    if not path.exists():
        raise EnvironmentIOError(f"events file not found: {path}")
    try:
        ledger = EventLedger.read_jsonl(path, repo_label=context.project_name)
    except LedgerFormatError as exc:
        _fail_config(f"cannot parse events file {path}: {exc}")

    thresholds = _load_thresholds(thresholds_path)
    result = analyze(ledger, context, cfg.policies, thresholds)
    written = write_artifacts(result, cfg.output_dir, with_figures=not no_figures)

    if result.assessment is not None:
        for metric_id, ma in result.assessment.metrics.items():
            if ma.zone == NOT_ASSESSABLE:
                click.echo(f"{metric_id}: {NOT_ASSESSABLE}")
            else:
                click.echo(f"{metric_id}: {ma.value:.4g} -> {ma.zone} ({ma.description})")
        click.echo(f"profile: {result.assessment.profile.value}")
    else:
        click.echo("empty ledger: metrics not assessable")
    for warning in result.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"wrote {len(written)} artifacts to {cfg.output_dir}")


def _load_thresholds(thresholds_path: str | None) -> ThresholdTable:
    if not thresholds_path:
        return default_thresholds()
    path = Path(thresholds_path)
    if not path.exists():
        raise EnvironmentIOError(f"thresholds file not found: {path}")
    try:
        return ThresholdTable.load(path)
    except (json.JSONDecodeError, ValueError, KeyError) as exc:
        _fail_config(f"bad thresholds file {path}: {exc}")


def _metric_set_from_values(values: tuple[str, ...], project: str) -> MetricSet:
    if len(values) not in (4, 5):
        _fail_config(
            "provide four or five values: churn, net accumulation, cleanup ratio, "
            "density [, normalized lifespan] (or use --metrics FILE)"
        )
    try:
        numbers = [float(v) for v in values]
    except ValueError as exc:
        _fail_config(f"metric values must be numeric: {exc}")
    return MetricSet(
        project_name=project,
        churn_rate=numbers[0],
        net_accumulation=numbers[1],
        cleanup_ratio=numbers[2],
        toggle_density=numbers[3],
        normalized_lifespan=numbers[4] if len(numbers) == 5 else None,
        normalized_lifespan_reason=None if len(numbers) == 5 else "not provided",
    )


@cli.command("assess")
@click.argument("values", nargs=-1)
@click.option("--metrics", "metrics_path", type=click.Path(), help="metrics.json from a report run.")
@click.option("--thresholds", "thresholds_path", type=click.Path(), help="Threshold zone JSON.")
@click.option("--project", default="project", help="Project name for inline values.")
@click.option("--json", "as_json", is_flag=True, default=False, help="Machine-readable output.")
def cmd_assess(values, metrics_path, thresholds_path, project, as_json):
    """Classify five metric values against the threshold zones."""
    if metrics_path and values:
        _fail_config("give either inline values or --metrics, not both")
    if metrics_path:
        path = Path(metrics_path)
        if not path.exists():
            raise EnvironmentIOError(f"metrics file not found: {path}")
        try:
            metrics = MetricSet.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError) as exc:
            _fail_config(f"cannot parse metrics file {path}: {exc}")
    else:
        metrics = _metric_set_from_values(values, project)

    assessment = assess_project(metrics, _load_thresholds(thresholds_path))
    if as_json:
        click.echo(json.dumps(assessment.to_dict(), indent=2))
        return
    for metric_id, ma in assessment.metrics.items():
        if ma.zone == NOT_ASSESSABLE:
            click.echo(f"{metric_id}: {NOT_ASSESSABLE}")
        else:
            click.echo(f"{metric_id}: {ma.value:.4g} -> {ma.zone} ({ma.description})")
    click.echo(f"profile: {assessment.profile.value}")
    click.echo(f"rationale: {assessment.rationale}")


def _community_row(metrics: MetricSet) -> str:
    def fmt(value: float | None) -> str:
        return "" if value is None else format(value, ".12g")

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        [
            metrics.project_name,
            fmt(metrics.churn_rate),
            fmt(metrics.net_accumulation),
            fmt(metrics.cleanup_ratio),
            fmt(metrics.toggle_density),
            fmt(metrics.normalized_lifespan),
            metrics.snapshot_date or "",
        ]
    )
    return buffer.getvalue()


@cli.command("export-community")
@click.option("--metrics", "metrics_paths", type=click.Path(), multiple=True, required=True,
              help="metrics.json file(s) to append (repeatable).")
@click.option("--csv", "csv_path", type=click.Path(), default="community.csv",
              help="Community benchmark CSV to append to.")
def cmd_export_community(metrics_paths, csv_path):
    """Append benchmark rows to the shared community CSV."""
    rows = []
    for raw in metrics_paths:
        path = Path(raw)
        if not path.exists():
            raise EnvironmentIOError(f"metrics file not found: {path}")
        try:
            metrics = MetricSet.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError) as exc:
            _fail_config(f"cannot parse metrics file {path}: {exc}")
        if metrics.churn_rate is None:
            _fail_config(f"metrics file {path} has no computed values (empty ledger?)")
        rows.append(_community_row(metrics))

    target = Path(csv_path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        is_new = not target.exists() or target.stat().st_size == 0
        with target.open("a", encoding="utf-8", newline="") as handle:
            if is_new:
                handle.write(COMMUNITY_HEADER + "\n")
            for row in rows:
                handle.write(row)
    except OSError as exc:
        raise EnvironmentIOError(f"cannot write {target}: {exc}") from exc
    click.echo(f"appended {len(rows)} row(s) to {target}")


@cli.command("thresholds")
@click.option("--thresholds", "thresholds_path", type=click.Path(),
              help="Custom threshold JSON to validate and re-emit.")
@click.option("--out", "out_path", type=click.Path(), help="Write to file instead of stdout.")
def cmd_thresholds(thresholds_path, out_path):
    """Emit the threshold zone table as JSON (the dashboard consumes this file)."""
    table = _load_thresholds(thresholds_path)
    text = table.to_json()
    if out_path:
        atomic_write_text(Path(out_path), text)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except LedgerFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except MiningError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.Abort:
        click.echo("aborted", err=True)
        return 130


if __name__ == "__main__":
    sys.exit(main())
