"""Extraction of toggle declaration events from unified diff text.

Only content lines inside hunks are scanned, so file header lines (``---``,
``+++``) and stray text between hunks never produce events.  Hunk membership
is tracked by consuming the line counts from each ``@@`` header; this also
disambiguates pathological content such as a deleted line that itself starts
with ``--``.
"""

from __future__ import annotations

import logging
import re
from typing import Iterator, NamedTuple

from .ledger import Action

log = logging.getLogger(__name__)

HUNK_HEADER = re.compile(
    r"^@@ -\d+(?:,(?P<old_count>\d+))? \+\d+(?:,(?P<new_count>\d+))? @@"
)
DIFF_HEADER_PREFIXES = (
    "diff ",
    "index ",
    "new file mode",
    "deleted file mode",
    "old mode",
    "new mode",
    "similarity index",
    "dissimilarity index",
    "rename from",
    "rename to",
    "copy from",
    "copy to",
    "Binary files",
)


class ContentLine(NamedTuple):
    sign: str  # '+' or '-'
    text: str  # line content without the sign
    path: str  # repository-relative path the line belongs to


class DeclarationEvent(NamedTuple):
    toggle_name: str
    action: Action
    source_path: str


def _strip_diff_path(raw: str) -> str:
    raw = raw.strip()
    if raw == "/dev/null":
        return ""
    if raw.startswith(("a/", "b/")):
        return raw[2:]
    return raw


def iter_content_lines(diff_text: str) -> Iterator[ContentLine]:
    """Yield +/- content lines of a unified diff with their file path.

    Added lines are attributed to the post-image path, removed lines to the
    pre-image path.  A malformed hunk header downgrades that file to a
    best-effort scan (with a warning): +/- lines are yielded until the next
    header, lines outside any hunk stay ignored.
    """
    old_path = ""
    new_path = ""
    old_left = 0
    new_left = 0
    loose_hunk = False

    for line in diff_text.splitlines():
        in_hunk = old_left > 0 or new_left > 0
        if not in_hunk and not loose_hunk:
            if line.startswith("--- "):
                old_path = _strip_diff_path(line[4:])
                continue
            if line.startswith("+++ "):
                new_path = _strip_diff_path(line[4:])
                continue
            match = HUNK_HEADER.match(line)
            if match:
                old_left = int(match.group("old_count") or "1")
                new_left = int(match.group("new_count") or "1")
                continue
            if line.startswith("@@"):
                log.warning("malformed hunk header %r; scanning following lines best-effort", line)
                loose_hunk = True
            continue

        if loose_hunk:
            if line.startswith(DIFF_HEADER_PREFIXES) or line.startswith(("+++ ", "--- ")):
                loose_hunk = False
                old_path = new_path = ""
                continue
            if line.startswith("@@"):
                loose_hunk = False
                match = HUNK_HEADER.match(line)
                if match:
                    old_left = int(match.group("old_count") or "1")
                    new_left = int(match.group("new_count") or "1")
                else:
                    log.warning("malformed hunk header %r; scanning best-effort", line)
                    loose_hunk = True
                continue
            if line.startswith("+"):
                yield ContentLine("+", line[1:], new_path)
            elif line.startswith("-"):
                yield ContentLine("-", line[1:], old_path)
            continue

        # Inside a counted hunk.
        if line.startswith("\\"):  # "\ No newline at end of file"
            continue
        if line.startswith("+"):
            new_left -= 1
            yield ContentLine("+", line[1:], new_path)
        elif line.startswith("-"):
            old_left -= 1
            yield ContentLine("-", line[1:], old_path)
        else:
            # Context line (leading space, or empty with some git versions).
            old_left -= 1
            new_left -= 1


def compile_patterns(patterns: list[str]) -> list[re.Pattern]:
    """Compile declaration patterns, requiring exactly one capture group each."""
    compiled = []
    for pattern in patterns:
        regex = re.compile(pattern)
        if regex.groups != 1:
            raise ValueError(
                f"declaration pattern must have exactly one capture group: {pattern!r}"
            )
        compiled.append(regex)
    return compiled


def scan_declaration_diff(
    diff_text: str, patterns: list[str] | list[re.Pattern]
) -> list[DeclarationEvent]:
    """Match declaration patterns against one diff, de-duplicated per (name, action).

    Patterns are tried in order on every content line; the first match wins
    and its capture group names the toggle.  ``+`` lines yield additions,
    ``-`` lines removals.
    """
    compiled = [p if isinstance(p, re.Pattern) else re.compile(p) for p in patterns]
    events: list[DeclarationEvent] = []
    seen: set[tuple[str, Action]] = set()
    for content in iter_content_lines(diff_text):
        for pattern in compiled:
            match = pattern.search(content.text)
            if not match:
                continue
            name = match.group(1)
            if not name:
                break
            action = Action.ADDED if content.sign == "+" else Action.REMOVED
            if (name, action) not in seen:
                seen.add((name, action))
                events.append(DeclarationEvent(name, action, content.path))
            break
    return events


def extract_declaration_events(
    diff_text: str, patterns: list[str]
) -> list[tuple[str, Action]]:
    """Spec-shaped wrapper over :func:`scan_declaration_diff` without paths."""
    return [(e.toggle_name, e.action) for e in scan_declaration_diff(diff_text, patterns)]
