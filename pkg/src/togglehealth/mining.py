"""Git history walking and toggle event extraction.

The walk follows first-parent history of one branch so that work merged from
side branches surfaces exactly once, at the merge commit.  Each commit is
diffed against its first parent, restricted to the configured watch paths,
and handed to the extractor for the configured mode: declaration patterns
(statement-level toggles) or file lifecycle (one file per toggle).
"""

from __future__ import annotations

import logging
import re
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from fnmatch import fnmatch
from pathlib import Path, PurePosixPath
from typing import NamedTuple

from .diffparse import compile_patterns, scan_declaration_diff
from .ledger import Action, EventLedger, ToggleEvent

log = logging.getLogger(__name__)

DEFAULT_BULK_THRESHOLD = 20


class MiningError(Exception):
    """Fatal mining failure: unreadable repository or unknown branch."""


class ExtractorConfigError(ValueError):
    """Extractor configuration violates its invariants."""


class ExtractorMode(Enum):
    DECLARATION_PATTERN = "declaration"
    FILE_LIFECYCLE = "file-lifecycle"


@dataclass
class ExtractorConfig:
    mode: ExtractorMode
    watch_paths: list[str] = field(default_factory=list)
    declaration_patterns: list[str] = field(default_factory=list)
    file_name_filter: str | None = None
    branch: str = "HEAD"

    def validate(self) -> None:
        if self.mode is ExtractorMode.DECLARATION_PATTERN:
            if not self.declaration_patterns:
                raise ExtractorConfigError("declaration mode requires at least one pattern")
            try:
                compile_patterns(self.declaration_patterns)
            except (re.error, ValueError) as exc:
                raise ExtractorConfigError(str(exc)) from exc
        elif self.mode is ExtractorMode.FILE_LIFECYCLE:
            if not self.file_name_filter:
                raise ExtractorConfigError("file-lifecycle mode requires a file name filter")


class ChangeKind(Enum):
    ADDED_FILE = "A"
    DELETED_FILE = "D"
    RENAMED_FILE = "R"
    MODIFIED_FILE = "M"


class FileChange(NamedTuple):
    kind: ChangeKind
    path: str
    old_path: str | None = None  # pre-rename path for RENAMED_FILE


class CommitInfo(NamedTuple):
    commit_id: str
    timestamp: datetime
    first_parent: str | None


class BulkCommit(NamedTuple):
    commit_id: str
    add_count: int
    remove_count: int
    timestamp: datetime


def glob_to_regex(pattern: str) -> re.Pattern:
    """Translate a path glob to a regex: ``**`` crosses slashes, ``*``/``?`` do not."""
    out = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "*":
            if pattern[i : i + 2] == "**":
                out.append(".*")
                i += 2
                # collapse "**/" so "a/**/b" also matches "a/b"
                if i < len(pattern) and pattern[i] == "/":
                    out[-1] = "(?:.*/)?"
                    i += 1
                continue
            out.append("[^/]*")
        elif ch == "?":
            out.append("[^/]")
        else:
            out.append(re.escape(ch))
        i += 1
    return re.compile("^" + "".join(out) + "$")


def _path_matcher(watch_paths: list[str]):
    regexes = [glob_to_regex(p) for p in watch_paths]
    return lambda path: any(r.match(path) for r in regexes)


def _git(repo: Path, *args: str) -> str:
    result = subprocess.run(
        ["git", "-C", str(repo), *args],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    if result.returncode != 0:
        raise GitCommandError(
            f"git {' '.join(args[:2])}... failed: "
            f"{result.stderr.decode('utf-8', 'replace').strip()}"
        )
    return result.stdout.decode("utf-8", "replace")


class GitCommandError(Exception):
    pass


def _pathspecs(watch_paths: list[str]) -> list[str]:
    return [f":(glob){p}" for p in watch_paths]


def list_commits(repo: Path, branch: str, watch_paths: list[str]) -> list[CommitInfo]:
    """First-parent history of ``branch`` touching the watched paths, oldest first."""
    args = [
        "log",
        "--first-parent",
        "--reverse",
        "--format=%H%x1f%ct%x1f%P",
        branch,
    ]
    if watch_paths:
        args.append("--")
        args.extend(_pathspecs(watch_paths))
    commits = []
    for line in _git(repo, *args).splitlines():
        if not line.strip():
            continue
        sha, ts, parents = line.split("\x1f")
        first_parent = parents.split()[0] if parents.strip() else None
        commits.append(
            CommitInfo(sha, datetime.fromtimestamp(int(ts), tz=timezone.utc), first_parent)
        )
    return commits


def commit_diff_text(repo: Path, commit: CommitInfo, watch_paths: list[str]) -> str:
    """Unified diff of a commit against its first parent, watched paths only."""
    args = ["diff-tree", "--no-commit-id", "--patch", "-r", "--find-renames"]
    if commit.first_parent is None:
        args += ["--root", commit.commit_id]
    else:
        args += [commit.first_parent, commit.commit_id]
    if watch_paths:
        args.append("--")
        args.extend(_pathspecs(watch_paths))
    return _git(repo, *args)


def commit_file_changes(repo: Path, commit: CommitInfo, watch_paths: list[str]) -> list[FileChange]:
    """Added/deleted/renamed files of a commit's first-parent diff."""
    args = ["diff-tree", "--no-commit-id", "--name-status", "-r", "--find-renames"]
    if commit.first_parent is None:
        args += ["--root", commit.commit_id]
    else:
        args += [commit.first_parent, commit.commit_id]
    if watch_paths:
        args.append("--")
        args.extend(_pathspecs(watch_paths))
    changes = []
    for line in _git(repo, *args).splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        status = parts[0]
        if status.startswith("R") and len(parts) >= 3:
            changes.append(FileChange(ChangeKind.RENAMED_FILE, parts[2], old_path=parts[1]))
        elif status.startswith("C") and len(parts) >= 3:
            # a copy creates a new file; the source is untouched
            changes.append(FileChange(ChangeKind.ADDED_FILE, parts[2]))
        elif status == "A":
            changes.append(FileChange(ChangeKind.ADDED_FILE, parts[1]))
        elif status == "D":
            changes.append(FileChange(ChangeKind.DELETED_FILE, parts[1]))
        else:
            changes.append(FileChange(ChangeKind.MODIFIED_FILE, parts[1]))
    return changes


def _file_lifecycle_events(
    commit_changes: list[FileChange], file_name_filter: str
) -> list[tuple[str, Action, str]]:
    events: list[tuple[str, Action, str]] = []
    matches = lambda path: fnmatch(PurePosixPath(path).name, file_name_filter)
    stem = lambda path: PurePosixPath(path).stem
    for change in commit_changes:
        if change.kind is ChangeKind.ADDED_FILE and matches(change.path):
            events.append((stem(change.path), Action.ADDED, change.path))
        elif change.kind is ChangeKind.DELETED_FILE and matches(change.path):
            events.append((stem(change.path), Action.REMOVED, change.path))
        elif change.kind is ChangeKind.RENAMED_FILE:
            old_ok = change.old_path is not None and matches(change.old_path)
            new_ok = matches(change.path)
            if old_ok and new_ok and stem(change.old_path) == stem(change.path):
                continue
            if old_ok:
                events.append((stem(change.old_path), Action.REMOVED, change.old_path))
            if new_ok:
                events.append((stem(change.path), Action.ADDED, change.path))
    return events


def extract_file_lifecycle_events(
    commit_changes: list[FileChange], file_name_filter: str
) -> list[tuple[str, Action]]:
    """Map file additions/deletions/renames to toggle events.

    The filter matches file basenames (``*.yml``); the toggle name is the file
    stem.  A rename whose two sides match the filter with an identical stem is
    a pure path move and yields nothing; otherwise each matching side
    contributes its own event (old side removed, new side added).
    """
    return [(name, action) for name, action, _ in _file_lifecycle_events(commit_changes, file_name_filter)]


def mine_repository(
    repo_location: Path | str,
    config: ExtractorConfig,
    since: datetime | None = None,
    until: datetime | None = None,
    label: str | None = None,
) -> EventLedger:
    """Walk a repository's history and return the sorted event ledger.

    ``since``/``until`` bound the committer timestamp (inclusive); they are
    applied here rather than via git's traversal cutoffs because commit dates
    are not monotone along first-parent history.  A commit whose diff cannot
    be produced is skipped with a warning; mining continues.
    """
    config.validate()
    repo = Path(repo_location)
    if not repo.is_dir():
        raise MiningError(f"repository path does not exist: {repo}")
    try:
        _git(repo, "rev-parse", "--git-dir")
    except GitCommandError as exc:
        raise MiningError(f"not a readable git repository: {repo} ({exc})") from exc
    try:
        _git(repo, "rev-parse", "--verify", "--quiet", f"{config.branch}^{{commit}}")
    except GitCommandError as exc:
        raise MiningError(f"branch not found: {config.branch!r} in {repo}") from exc

    if label is None:
        label = repo.resolve().name

    if not config.watch_paths:
        log.warning("no watch paths configured; ledger is empty")
        return EventLedger.build([], repo_label=label)

    commits = [
        c
        for c in list_commits(repo, config.branch, config.watch_paths)
        if (since is None or c.timestamp >= since) and (until is None or c.timestamp <= until)
    ]
    if not commits:
        return EventLedger.build([], repo_label=label)
    mined_range = (
        min(c.timestamp for c in commits),
        max(c.timestamp for c in commits),
    )

    in_watch = _path_matcher(config.watch_paths)
    patterns = (
        compile_patterns(config.declaration_patterns)
        if config.mode is ExtractorMode.DECLARATION_PATTERN
        else []
    )

    events: list[ToggleEvent] = []
    for commit in commits:
        try:
            if config.mode is ExtractorMode.DECLARATION_PATTERN:
                diff_text = commit_diff_text(repo, commit, config.watch_paths)
                for decl in scan_declaration_diff(diff_text, patterns):
                    if decl.source_path and not in_watch(decl.source_path):
                        continue
                    events.append(
                        ToggleEvent(
                            toggle_name=decl.toggle_name,
                            action=decl.action,
                            commit_id=commit.commit_id,
                            timestamp=commit.timestamp,
                            source_path=decl.source_path,
                        )
                    )
            else:
                changes = [
                    ch
                    for ch in commit_file_changes(repo, commit, config.watch_paths)
                    if in_watch(ch.path) or (ch.old_path and in_watch(ch.old_path))
                ]
                for name, action, path in _file_lifecycle_events(
                    changes, config.file_name_filter
                ):
                    events.append(
                        ToggleEvent(
                            toggle_name=name,
                            action=action,
                            commit_id=commit.commit_id,
                            timestamp=commit.timestamp,
                            source_path=path,
                        )
                    )
        except GitCommandError as exc:
            log.warning("skipping commit %s: %s", commit.commit_id[:12], exc)
            continue

    return EventLedger.build(events, repo_label=label, mined_range=mined_range)


def detect_bulk_events(ledger: EventLedger, threshold: int = DEFAULT_BULK_THRESHOLD) -> list[BulkCommit]:
    """Commits whose total event count reaches ``threshold``, by timestamp.

    Bulk commits (refactors, migrations, mass cleanups) are annotated in
    reports; they are never dropped from the ledger.
    """
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    adds: dict[str, int] = {}
    removes: dict[str, int] = {}
    first_seen: dict[str, datetime] = {}
    for event in ledger.events:
        first_seen.setdefault(event.commit_id, event.timestamp)
        bucket = adds if event.action is Action.ADDED else removes
        bucket[event.commit_id] = bucket.get(event.commit_id, 0) + 1
    bulk = [
        BulkCommit(sha, adds.get(sha, 0), removes.get(sha, 0), first_seen[sha])
        for sha in first_seen
        if adds.get(sha, 0) + removes.get(sha, 0) >= threshold
    ]
    bulk.sort(key=lambda b: (b.timestamp, b.commit_id))
    return bulk
