from __future__ import annotations

import json
import subprocess
from pathlib import Path

import pytest

from togglehealth.cli import main
from togglehealth.assessment import default_thresholds

DECL_PATTERNS_TOML = """\
declaration_patterns = [
    '^\\s*([A-Za-z_][A-Za-z0-9_]*)\\s+featuregate\\.Feature\\s*=',
    '^\\s*([A-Za-z_][A-Za-z0-9_]*)\\s+utilfeature\\.Feature\\s*=',
]
"""


def write_declaration_config(tmp_path: Path, repo: Path) -> Path:
    config = tmp_path / "fixture-decl.toml"
    config.write_text(
        f"""\
[project]
name = "fixture"
analysis_months = 0.8
lines_of_code = 50000
release_cycle_days = 7

[repo]
path = "{repo}"
branch = "master"
since = "2021-01-02T00:00:00Z"

[extractor]
mode = "declaration"
watch_paths = ["pkg/features/kube_features.go"]
{DECL_PATTERNS_TOML}
[policies]
bulk_threshold = 20
""",
        encoding="utf-8",
    )
    return config


def write_file_config(tmp_path: Path, repo: Path) -> Path:
    config = tmp_path / "fixture-file.toml"
    config.write_text(
        f"""\
[project]
name = "fixture-flags"
analysis_months = 1.0
lines_of_code = 50000
release_cycle_days = 7
snapshot_time = "2021-01-31T00:00:00Z"

[repo]
path = "{repo}"
branch = "master"

[extractor]
mode = "file-lifecycle"
watch_paths = ["config/feature_flags/**"]
file_name_filter = "*.yml"
""",
        encoding="utf-8",
    )
    return config


class TestMine:
    def test_declaration_run_matches_frozen_jsonl(self, fixture_repo, tmp_path, data_dir, capsys):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        out = tmp_path / "out"
        assert main(["mine", "--config", str(config), "--out", str(out)]) == 0
        produced = (out / "events.jsonl").read_bytes()
        expected = (data_dir / "expected_declaration_events.jsonl").read_bytes()
        assert produced == expected
        stdout = capsys.readouterr().out
        assert "14 events" in stdout

    def test_file_run_reports_bulk_commit(self, fixture_repo, tmp_path, data_dir, capsys):
        config = write_file_config(tmp_path, fixture_repo.root)
        out = tmp_path / "out"
        assert main(["mine", "--config", str(config), "--out", str(out)]) == 0
        produced = (out / "events.jsonl").read_bytes()
        expected = (data_dir / "expected_file_events.jsonl").read_bytes()
        assert produced == expected
        stdout = capsys.readouterr().out
        assert "bulk commits (threshold 20):" in stdout
        assert fixture_repo.shas["c16"][:12] in stdout

    def test_mine_is_byte_deterministic(self, fixture_repo, tmp_path):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["mine", "--config", str(config), "--out", str(out1)]) == 0
        assert main(["mine", "--config", str(config), "--out", str(out2)]) == 0
        assert (out1 / "events.jsonl").read_bytes() == (out2 / "events.jsonl").read_bytes()

    def test_missing_repo_exits_2(self, tmp_path, capsys):
        config = write_declaration_config(tmp_path, tmp_path / "no-such-repo")
        code = main(["mine", "--config", str(config), "--out", str(tmp_path / "out")])
        assert code == 2
        assert not (tmp_path / "out" / "events.jsonl").exists()

    def test_unknown_branch_exits_2(self, fixture_repo, tmp_path, capsys):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        code = main(
            ["mine", "--config", str(config), "--branch", "nope", "--out", str(tmp_path / "o")]
        )
        assert code == 2

    def test_until_before_since_exits_1(self, fixture_repo, tmp_path, capsys):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        code = main(
            [
                "mine",
                "--config",
                str(config),
                "--since",
                "2021-02-01",
                "--until",
                "2021-01-01",
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert code == 1

    def test_no_repo_configured_exits_1(self, tmp_path, capsys):
        code = main(["mine", "--preset", "kubernetes-gates", "--out", str(tmp_path / "o")])
        assert code == 1


class TestReport:
    @pytest.fixture()
    def mined_out(self, fixture_repo, tmp_path):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        out = tmp_path / "out"
        assert main(["mine", "--config", str(config), "--out", str(out)]) == 0
        return config, out

    def test_artifacts_written(self, mined_out, capsys):
        config, out = mined_out
        assert main(["report", "--config", str(config), "--out", str(out)]) == 0
        for name in (
            "metrics.json",
            "survival.csv",
            "tiers.json",
            "permanent.json",
            "records.json",
            "timeseries.csv",
            "report.md",
            "monthly_events.png",
            "active_toggles.png",
            "lifespan_histogram.png",
            "survival_curve.png",
        ):
            assert (out / name).exists(), name

        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["project"] == "fixture"
        assert metrics["inputs"]["additions_total"] == 8
        assert metrics["inputs"]["removals_total"] == 6
        assert metrics["inputs"]["active_count"] == 3

        report_md = (out / "report.md").read_text()
        assert "## Warnings" in report_md
        assert "anchored" in report_md  # orphan-removal warning block

    def test_report_zones_match_assess(self, mined_out, capsys):
        config, out = mined_out
        assert main(["report", "--config", str(config), "--out", str(out)]) == 0
        report_lines = [
            line
            for line in capsys.readouterr().out.splitlines()
            if "->" in line
        ]
        assert main(["assess", "--metrics", str(out / "metrics.json")]) == 0
        assess_lines = [
            line for line in capsys.readouterr().out.splitlines() if "->" in line
        ]
        assert report_lines == assess_lines

    def test_timeseries_telescopes(self, mined_out):
        config, out = mined_out
        assert main(["report", "--config", str(config), "--out", str(out)]) == 0
        rows = (out / "timeseries.csv").read_text().strip().splitlines()
        daily = [r for r in rows if r.startswith("daily_active,")]
        final_active = int(daily[-1].rsplit(",", 1)[1])
        assert final_active == 8 - 6

    def test_report_is_byte_deterministic(self, fixture_repo, tmp_path):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        outputs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            assert main(["mine", "--config", str(config), "--out", str(out)]) == 0
            assert main(["report", "--config", str(config), "--out", str(out), "--no-figures"]) == 0
            outputs.append(out)
        for artifact in ("events.jsonl", "metrics.json", "report.md", "timeseries.csv"):
            assert (outputs[0] / artifact).read_bytes() == (outputs[1] / artifact).read_bytes()

    def test_empty_events_file_reports_na(self, tmp_path, fixture_repo, capsys):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        out = tmp_path / "out"
        out.mkdir()
        (out / "events.jsonl").write_text("")
        assert main(["report", "--config", str(config), "--out", str(out)]) == 0
        report_md = (out / "report.md").read_text()
        assert "n/a (empty ledger)" in report_md
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["churn_rate"] is None

    def test_missing_events_exits_2(self, tmp_path, fixture_repo, capsys):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        assert main(["report", "--config", str(config), "--out", str(tmp_path / "nope")]) == 2

    def test_malformed_events_exits_1(self, tmp_path, fixture_repo, capsys):
        config = write_declaration_config(tmp_path, fixture_repo.root)
        out = tmp_path / "out"
        out.mkdir()
        (out / "events.jsonl").write_text("this is not json\n")
        assert main(["report", "--config", str(config), "--out", str(out)]) == 1

    def test_raw_policy_changes_records(self, mined_out):
        config, out = mined_out
        assert main(
            ["report", "--config", str(config), "--out", str(out), "--refactor-policy", "raw",
             "--no-figures"]
        ) == 0
        records = json.loads((out / "records.json").read_text())
        names = {r["toggle"] for r in records}
        assert "BetaGate#2" in names  # raw pairing reopens the refactored gate


class TestAssess:
    def test_kubernetes_profile(self, capsys):
        assert main(["assess", "10.2", "1.5", "0.74", "0.016", "6.1"]) == 0
        out = capsys.readouterr().out
        assert "profile: Conservative" in out

    def test_gitlab_profile(self, capsys):
        assert main(["assess", "104.5", "6.5", "0.88", "0.081", "6.2"]) == 0
        out = capsys.readouterr().out
        assert "profile: Aggressive" in out

    def test_missing_fifth_value(self, capsys):
        assert main(["assess", "10.2", "1.5", "0.74", "0.016"]) == 0
        out = capsys.readouterr().out
        assert "norm_lifespan: not assessable" in out

    def test_non_numeric_exits_1(self, capsys):
        assert main(["assess", "10.2", "abc", "0.74", "0.016", "6.1"]) == 1

    def test_too_few_values_exits_1(self, capsys):
        assert main(["assess", "10.2"]) == 1

    def test_inline_and_file_conflict_exits_1(self, tmp_path, capsys):
        metrics = tmp_path / "m.json"
        metrics.write_text("{}")
        assert main(["assess", "1", "2", "3", "4", "--metrics", str(metrics)]) == 1

    def test_json_output(self, capsys):
        assert main(["assess", "--json", "104.5", "6.5", "0.88", "0.081", "6.2"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["profile"] == "Aggressive"
        assert payload["metrics"]["churn"]["zone"] == "High"


class TestExportCommunity:
    def write_metrics(self, tmp_path: Path) -> Path:
        path = tmp_path / "metrics.json"
        path.write_text(
            json.dumps(
                {
                    "project": "kubernetes",
                    "churn_rate": 10.2,
                    "net_accumulation": 1.5,
                    "cleanup_ratio": 0.74,
                    "toggle_density": 0.016,
                    "normalized_lifespan": 6.1,
                    "snapshot_date": "2025-08-19",
                }
            )
        )
        return path

    def test_row_appended_with_header(self, tmp_path, capsys):
        metrics = self.write_metrics(tmp_path)
        csv_path = tmp_path / "community.csv"
        assert main(["export-community", "--metrics", str(metrics), "--csv", str(csv_path)]) == 0
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == (
            "project,churn_rate,net_accumulation,cleanup_ratio,"
            "toggle_density,normalized_lifespan,snapshot_date"
        )
        assert lines[1] == "kubernetes,10.2,1.5,0.74,0.016,6.1,2025-08-19"

    def test_append_twice_one_header(self, tmp_path, capsys):
        metrics = self.write_metrics(tmp_path)
        csv_path = tmp_path / "community.csv"
        main(["export-community", "--metrics", str(metrics), "--csv", str(csv_path)])
        main(["export-community", "--metrics", str(metrics), "--csv", str(csv_path)])
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 3
        assert lines[1] == lines[2]

    def test_missing_lifespan_leaves_field_empty(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        path.write_text(
            json.dumps(
                {
                    "project": "p",
                    "churn_rate": 1.0,
                    "net_accumulation": 0.5,
                    "cleanup_ratio": 0.5,
                    "toggle_density": 0.01,
                    "normalized_lifespan": None,
                }
            )
        )
        csv_path = tmp_path / "c.csv"
        assert main(["export-community", "--metrics", str(path), "--csv", str(csv_path)]) == 0
        assert csv_path.read_text().strip().splitlines()[1] == "p,1,0.5,0.5,0.01,,"

    def test_unwritable_path_exits_2(self, tmp_path, capsys):
        metrics = self.write_metrics(tmp_path)
        target = tmp_path / "plainfile"
        target.write_text("x")
        code = main(
            ["export-community", "--metrics", str(metrics), "--csv", str(target / "c.csv")]
        )
        assert code == 2


class TestThresholdsCommand:
    def test_emits_default_table(self, tmp_path, capsys):
        out = tmp_path / "thresholds.json"
        assert main(["thresholds", "--out", str(out)]) == 0
        assert out.read_text() == default_thresholds().to_json()

    def test_round_trips_custom_table(self, tmp_path, capsys):
        custom = tmp_path / "custom.json"
        custom.write_text(default_thresholds().to_json())
        assert main(["thresholds", "--thresholds", str(custom)]) == 0
        assert json.loads(capsys.readouterr().out) == json.loads(custom.read_text())

    def test_bad_thresholds_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"churn": [{"zone": "Only", "min": 0, "max": null, "description": ""}]}')
        assert main(["assess", "1", "2", "3", "4", "--thresholds", str(bad)]) == 1


class TestPresets:
    def test_presets_load_and_validate(self, capsys):
        from togglehealth.config import load_preset, validate_for_mining

        for name in ("kubernetes-gates", "gitlab-flags"):
            cfg = load_preset(name)
            validate_for_mining(cfg)
            assert cfg.project is not None
            assert cfg.project.release_cycle_days in (120, 30)

    def test_unknown_preset_exits_1(self, tmp_path, capsys):
        code = main(["mine", "--preset", "nope", "--out", str(tmp_path)])
        assert code != 0


def test_console_script_end_to_end(fixture_repo, tmp_path):
    config = write_declaration_config(tmp_path, fixture_repo.root)
    out = tmp_path / "out"
    mine = subprocess.run(
        ["togglehealth", "mine", "--config", str(config), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert mine.returncode == 0, mine.stderr
    report = subprocess.run(
        ["togglehealth", "report", "--config", str(config), "--out", str(out), "--no-figures"],
        capture_output=True,
        text=True,
    )
    assert report.returncode == 0, report.stderr
    assert (out / "report.md").exists()
