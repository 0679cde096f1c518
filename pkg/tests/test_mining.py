from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

import pytest

from togglehealth.ledger import Action, EventLedger, ToggleEvent, parse_instant
from togglehealth.mining import (
    ChangeKind,
    ExtractorConfig,
    ExtractorConfigError,
    ExtractorMode,
    FileChange,
    MiningError,
    detect_bulk_events,
    extract_file_lifecycle_events,
    glob_to_regex,
    mine_repository,
)

from repo_fixture import DECLARATION_SINCE

DECLARATION_PATTERNS = [
    r'^\s*([A-Za-z_][A-Za-z0-9_]*)\s+featuregate\.Feature\s*=',
    r'^\s*([A-Za-z_][A-Za-z0-9_]*)\s+utilfeature\.Feature\s*=',
]


def declaration_config() -> ExtractorConfig:
    return ExtractorConfig(
        mode=ExtractorMode.DECLARATION_PATTERN,
        watch_paths=["pkg/features/kube_features.go"],
        declaration_patterns=DECLARATION_PATTERNS,
        branch="master",
    )


def file_config() -> ExtractorConfig:
    return ExtractorConfig(
        mode=ExtractorMode.FILE_LIFECYCLE,
        watch_paths=["config/feature_flags/**"],
        file_name_filter="*.yml",
        branch="master",
    )


class TestGlobToRegex:
    @pytest.mark.parametrize(
        "pattern,path,matches",
        [
            ("pkg/features/kube_features.go", "pkg/features/kube_features.go", True),
            ("pkg/features/kube_features.go", "pkg/features/other.go", False),
            ("config/feature_flags/**", "config/feature_flags/ops/a.yml", True),
            ("config/feature_flags/**", "config/feature_flags/a.yml", True),
            ("config/feature_flags/**", "config/other/a.yml", False),
            ("a/**/b.yml", "a/x/y/b.yml", True),
            ("a/**/b.yml", "a/b.yml", True),
            ("*.yml", "a.yml", True),
            ("*.yml", "dir/a.yml", False),
            ("di?/*.yml", "dir/a.yml", True),
        ],
    )
    def test_matching(self, pattern, path, matches):
        assert bool(glob_to_regex(pattern).match(path)) == matches


class TestExtractorConfig:
    def test_declaration_mode_requires_patterns(self):
        config = ExtractorConfig(mode=ExtractorMode.DECLARATION_PATTERN, watch_paths=["x"])
        with pytest.raises(ExtractorConfigError):
            config.validate()

    def test_pattern_group_count_checked(self):
        config = ExtractorConfig(
            mode=ExtractorMode.DECLARATION_PATTERN,
            watch_paths=["x"],
            declaration_patterns=["nogroup"],
        )
        with pytest.raises(ExtractorConfigError):
            config.validate()

    def test_file_mode_requires_filter(self):
        config = ExtractorConfig(mode=ExtractorMode.FILE_LIFECYCLE, watch_paths=["x"])
        with pytest.raises(ExtractorConfigError):
            config.validate()


class TestFileLifecycleExtraction:
    def test_added_file(self):
        changes = [FileChange(ChangeKind.ADDED_FILE, "config/feature_flags/ops/access_rest_chat.yml")]
        assert extract_file_lifecycle_events(changes, "*.yml") == [
            ("access_rest_chat", Action.ADDED)
        ]

    def test_same_stem_rename_is_a_move(self):
        changes = [
            FileChange(
                ChangeKind.RENAMED_FILE,
                "config/feature_flags/development/x.yml",
                old_path="config/feature_flags/ops/x.yml",
            )
        ]
        assert extract_file_lifecycle_events(changes, "*.yml") == []

    def test_delete_plus_add_in_one_commit(self):
        changes = [
            FileChange(ChangeKind.DELETED_FILE, "flags/foo.yml"),
            FileChange(ChangeKind.ADDED_FILE, "flags/bar.yml"),
        ]
        assert extract_file_lifecycle_events(changes, "*.yml") == [
            ("foo", Action.REMOVED),
            ("bar", Action.ADDED),
        ]

    def test_stem_changing_rename(self):
        changes = [
            FileChange(ChangeKind.RENAMED_FILE, "flags/new.yml", old_path="flags/old.yml")
        ]
        assert extract_file_lifecycle_events(changes, "*.yml") == [
            ("old", Action.REMOVED),
            ("new", Action.ADDED),
        ]

    def test_rename_out_of_filter_only_removes(self):
        changes = [
            FileChange(ChangeKind.RENAMED_FILE, "flags/x.yml.disabled", old_path="flags/x.yml")
        ]
        assert extract_file_lifecycle_events(changes, "*.yml") == [("x", Action.REMOVED)]

    def test_filter_applies_to_basename(self):
        changes = [FileChange(ChangeKind.ADDED_FILE, "flags/readme.md")]
        assert extract_file_lifecycle_events(changes, "*.yml") == []

    def test_modifications_ignored(self):
        changes = [FileChange(ChangeKind.MODIFIED_FILE, "flags/x.yml")]
        assert extract_file_lifecycle_events(changes, "*.yml") == []


class TestMineFixtureRepo:
    def test_declaration_ledger_matches_frozen_expectation(self, fixture_repo, data_dir):
        ledger = mine_repository(
            fixture_repo.root,
            declaration_config(),
            since=parse_instant(DECLARATION_SINCE),
            label="fixture",
        )
        expected = (data_dir / "expected_declaration_events.jsonl").read_text()
        assert ledger.to_jsonl() == expected

    def test_file_ledger_matches_frozen_expectation(self, fixture_repo, data_dir):
        ledger = mine_repository(fixture_repo.root, file_config(), label="fixture")
        expected = (data_dir / "expected_file_events.jsonl").read_text()
        assert ledger.to_jsonl() == expected

    def test_merge_commit_events_surface_at_merge(self, fixture_repo):
        ledger = mine_repository(fixture_repo.root, file_config())
        side_adds = [
            e for e in ledger.events
            if e.toggle_name == "side_flag" and e.action is Action.ADDED
        ]
        assert len(side_adds) == 1
        assert side_adds[0].commit_id == fixture_repo.shas["c27"]
        assert fixture_repo.shas["s1"] not in {e.commit_id for e in ledger.events}

    def test_every_event_commit_is_in_history(self, fixture_repo):
        ledger = mine_repository(fixture_repo.root, file_config())
        known = set(fixture_repo.shas.values())
        assert all(e.commit_id in known for e in ledger.events)

    def test_mining_is_deterministic(self, fixture_repo):
        first = mine_repository(fixture_repo.root, declaration_config())
        second = mine_repository(fixture_repo.root, declaration_config())
        assert first.to_jsonl() == second.to_jsonl()

    def test_empty_watch_paths_yield_empty_ledger(self, fixture_repo):
        config = ExtractorConfig(
            mode=ExtractorMode.FILE_LIFECYCLE,
            watch_paths=[],
            file_name_filter="*.yml",
            branch="master",
        )
        ledger = mine_repository(fixture_repo.root, config)
        assert ledger.events == []

    def test_until_bound(self, fixture_repo):
        ledger = mine_repository(
            fixture_repo.root,
            file_config(),
            until=parse_instant("2021-01-15T23:59:59Z"),
        )
        names = {e.toggle_name for e in ledger.events}
        assert "bulk_00" not in names
        assert "ff_two_renamed" in names

    def test_ledger_ordering_invariant(self, fixture_repo):
        ledger = mine_repository(fixture_repo.root, file_config())
        keys = [e.sort_key for e in ledger.events]
        assert keys == sorted(keys)


class TestMiningErrors:
    def test_missing_repo(self, tmp_path):
        with pytest.raises(MiningError, match="does not exist"):
            mine_repository(tmp_path / "nope", declaration_config())

    def test_not_a_repo(self, tmp_path):
        (tmp_path / "plain").mkdir()
        with pytest.raises(MiningError, match="not a readable git repository"):
            mine_repository(tmp_path / "plain", declaration_config())

    def test_unknown_branch(self, fixture_repo):
        config = declaration_config()
        config.branch = "does-not-exist"
        with pytest.raises(MiningError, match="branch not found"):
            mine_repository(fixture_repo.root, config)


class TestBulkDetection:
    def test_fixture_bulk_commit_detected(self, fixture_repo):
        ledger = mine_repository(fixture_repo.root, file_config())
        bulk = detect_bulk_events(ledger, threshold=20)
        assert len(bulk) == 1
        assert bulk[0].commit_id == fixture_repo.shas["c16"]
        assert (bulk[0].add_count, bulk[0].remove_count) == (25, 0)

    def test_mixed_bulk_commit(self):
        t = datetime(2022, 4, 1, tzinfo=timezone.utc)
        events = [
            ToggleEvent(f"a{i}", Action.ADDED, "big", t) for i in range(112)
        ] + [ToggleEvent(f"r{i}", Action.REMOVED, "big", t) for i in range(123)]
        ledger = EventLedger.build(events)
        bulk = detect_bulk_events(ledger, threshold=50)
        assert [(b.add_count, b.remove_count) for b in bulk] == [(112, 123)]

    def test_uniform_ledger_below_threshold(self):
        t = datetime(2022, 4, 1, tzinfo=timezone.utc)
        events = [
            ToggleEvent(f"t{i}", Action.ADDED, f"c{i}", t) for i in range(5)
        ]
        assert detect_bulk_events(EventLedger.build(events), threshold=2) == []

    def test_degenerate_threshold_lists_every_commit(self):
        t = datetime(2022, 4, 1, tzinfo=timezone.utc)
        events = [
            ToggleEvent(f"t{i}", Action.ADDED, f"c{i}", t) for i in range(5)
        ]
        assert len(detect_bulk_events(EventLedger.build(events), threshold=1)) == 5

    def test_threshold_must_be_positive(self):
        with pytest.raises(ValueError):
            detect_bulk_events(EventLedger.build([]), threshold=0)
