"""Run configuration: TOML config files, shipped presets, CLI overrides."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from datetime import datetime
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .ledger import ProjectContext, RefactorPolicy, parse_instant
from .mining import DEFAULT_BULK_THRESHOLD, ExtractorConfig, ExtractorConfigError, ExtractorMode

log = logging.getLogger(__name__)

PRESET_NAMES = ("kubernetes-gates", "gitlab-flags")


class ConfigError(ValueError):
    """Configuration file or flag combination is invalid."""


@dataclass
class Policies:
    refactor_policy: RefactorPolicy = RefactorPolicy.COALESCE_SAME_COMMIT
    include_anomalous: bool = False
    bulk_threshold: int = DEFAULT_BULK_THRESHOLD


@dataclass
class RunConfig:
    """Everything one pipeline run needs: context, extractor, policies, paths."""

    project: ProjectContext | None = None
    extractor: ExtractorConfig = field(
        default_factory=lambda: ExtractorConfig(mode=ExtractorMode.DECLARATION_PATTERN)
    )
    policies: Policies = field(default_factory=Policies)
    repo_path: Path | None = None
    since: datetime | None = None
    until: datetime | None = None
    output_dir: Path = Path("togglehealth-out")

    def require_project(self) -> ProjectContext:
        if self.project is None:
            raise ConfigError(
                "project context required: set [project] name, analysis_months, "
                "lines_of_code and release_cycle_days in the config file"
            )
        return self.project

    def require_repo(self) -> Path:
        if self.repo_path is None:
            raise ConfigError("repository path required (--repo or [repo].path)")
        return self.repo_path

    def check_window(self) -> None:
        if self.since and self.until and self.until < self.since:
            raise ConfigError("--until must not precede --since")


def _parse_project(data: dict) -> ProjectContext:
    try:
        return ProjectContext(
            project_name=str(data["name"]),
            analysis_months=float(data["analysis_months"]),
            lines_of_code=int(data["lines_of_code"]),
            release_cycle_days=float(data["release_cycle_days"]),
            snapshot_time=parse_instant(data["snapshot_time"]) if "snapshot_time" in data else None,
        )
    except KeyError as exc:
        raise ConfigError(f"[project] missing required key: {exc.args[0]}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [project] value: {exc}") from exc


def _parse_extractor(data: dict, base: ExtractorConfig) -> ExtractorConfig:
    mode = base.mode
    if "mode" in data:
        try:
            mode = ExtractorMode(data["mode"])
        except ValueError as exc:
            raise ConfigError(
                f"unknown extractor mode {data['mode']!r}; "
                f"expected one of {[m.value for m in ExtractorMode]}"
            ) from exc
    return ExtractorConfig(
        mode=mode,
        watch_paths=list(data.get("watch_paths", base.watch_paths)),
        declaration_patterns=list(data.get("declaration_patterns", base.declaration_patterns)),
        file_name_filter=data.get("file_name_filter", base.file_name_filter),
        branch=data.get("branch", base.branch),
    )


def _parse_policies(data: dict, base: Policies) -> Policies:
    policies = replace(base)
    if "refactor_policy" in data:
        try:
            policies.refactor_policy = RefactorPolicy(data["refactor_policy"])
        except ValueError as exc:
            raise ConfigError(
                f"unknown refactor_policy {data['refactor_policy']!r}; expected 'coalesce' or 'raw'"
            ) from exc
    if "include_anomalous" in data:
        policies.include_anomalous = bool(data["include_anomalous"])
    if "bulk_threshold" in data:
        threshold = int(data["bulk_threshold"])
        if threshold < 1:
            raise ConfigError("bulk_threshold must be >= 1")
        policies.bulk_threshold = threshold
    return policies


def config_from_dict(data: dict, base: RunConfig | None = None) -> RunConfig:
    """Overlay a parsed TOML document on top of a base configuration."""
    config = base if base is not None else RunConfig()
    if "project" in data:
        config.project = _parse_project(data["project"])
    repo = data.get("repo", {})
    if "path" in repo:
        config.repo_path = Path(repo["path"])
    if "branch" in repo:
        config.extractor.branch = repo["branch"]
    if "since" in repo:
        config.since = parse_instant(repo["since"]) if isinstance(repo["since"], str) else repo["since"]
    if "until" in repo:
        config.until = parse_instant(repo["until"]) if isinstance(repo["until"], str) else repo["until"]
    if "extractor" in data:
        branch = config.extractor.branch
        config.extractor = _parse_extractor(data["extractor"], config.extractor)
        if "branch" not in data["extractor"]:
            config.extractor.branch = branch
    if "policies" in data:
        config.policies = _parse_policies(data["policies"], config.policies)
    if "output" in data and "dir" in data["output"]:
        config.output_dir = Path(data["output"]["dir"])
    return config


def load_config_file(path: Path | str, base: RunConfig | None = None) -> RunConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
    return config_from_dict(data, base=base)


def load_preset(name: str, base: RunConfig | None = None) -> RunConfig:
    """Load one of the shipped presets by name."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    text = resources.files("togglehealth").joinpath(f"presets/{name}.toml").read_text("utf-8")
    return config_from_dict(tomllib.loads(text), base=base)


def validate_for_mining(config: RunConfig) -> None:
    config.check_window()
    try:
        config.extractor.validate()
    except ExtractorConfigError as exc:
        raise ConfigError(str(exc)) from exc
