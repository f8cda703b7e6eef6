"""End-to-end pipeline runs over the shipped fixtures, plus CLI surface."""

import json
from pathlib import Path

import pytest

from ctikit.cli import main as cli_main
from ctikit.enrich import CountingTransport
from ctikit.pipeline import PipelineConfig, PipelineError, run_pipeline
from ctikit.artifacts import read_csv, read_jsonl

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
CONFIG = FIXTURES / "pipeline.toml"

EXPECTED_ARTIFACTS = [
    "posts.jsonl",
    "ingest_stats.json",
    "tokens.jsonl",
    "text_model.json",
    "relevant.jsonl",
    "iocs.jsonl",
    "verdicts.jsonl",
    "enrich_failures.jsonl",
    "correctness.csv",
    "timeliness_records.csv",
    "timeliness_summary.csv",
    "overlap.csv",
    "monthly.csv",
    "features.csv",
    "bot_model.json",
    "bot_predictions.csv",
    "propbot.json",
    "importance.csv",
    "instance_explanation.csv",
    "summary.txt",
    "manifest.json",
]


def _run(tmp_path, name="out", transport=None):
    config = PipelineConfig.from_file(str(CONFIG), overrides={"output_dir": str(tmp_path / name)})
    return run_pipeline(config, transport=transport)


def _tree_bytes(outdir: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(outdir)): p.read_bytes() for p in sorted(outdir.rglob("*")) if p.is_file()
    }


def test_full_fixture_run_produces_all_artifacts(tmp_path):
    outdir = _run(tmp_path)
    for name in EXPECTED_ARTIFACTS:
        assert (outdir / name).exists(), name
    stats = json.loads((outdir / "ingest_stats.json").read_text())
    assert stats["retained"] > 100
    header, rows = read_csv(outdir / "correctness.csv")
    assert header == ["ioc_type", "n_ioc", "n_malicious", "pct_malicious"]
    assert rows[-1][0] == "total"
    summary = (outdir / "summary.txt").read_text()
    assert "correctness" in summary and "automated accounts" in summary


def test_two_runs_byte_identical_and_offline(tmp_path):
    sentinel_a = CountingTransport()
    sentinel_b = CountingTransport()
    out_a = _run(tmp_path, "a", transport=sentinel_a)
    out_b = _run(tmp_path, "b", transport=sentinel_b)
    assert sentinel_a.requests_made == 0
    assert sentinel_b.requests_made == 0
    assert _tree_bytes(out_a) == _tree_bytes(out_b)


def test_resume_skips_stages_and_reruns_on_config_change(tmp_path, caplog):
    import logging

    outdir = tmp_path / "out"
    config = PipelineConfig.from_file(str(CONFIG), overrides={"output_dir": str(outdir)})
    run_pipeline(config)
    with caplog.at_level(logging.INFO, logger="ctikit.pipeline"):
        run_pipeline(config)
    skipped = [r for r in caplog.records if "skipped" in r.getMessage()]
    assert len(skipped) == 11

    caplog.clear()
    changed = PipelineConfig.from_file(
        str(CONFIG), overrides={"output_dir": str(outdir), "seed": 8}
    )
    with caplog.at_level(logging.INFO, logger="ctikit.pipeline"):
        run_pipeline(changed)
    assert not [r for r in caplog.records if "skipped" in r.getMessage()]


def test_stage_rerun_after_output_removed(tmp_path):
    outdir = _run(tmp_path)
    (outdir / "verdicts.jsonl").unlink()
    config = PipelineConfig.from_file(str(CONFIG), overrides={"output_dir": str(outdir)})
    run_pipeline(config)
    assert (outdir / "verdicts.jsonl").exists()


def test_unknown_config_key_rejected(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('posts = "x.jsonl"\nmystery_knob = 3\n')
    with pytest.raises(PipelineError) as err:
        PipelineConfig.from_file(str(bad))
    assert err.value.code == "unknown_key"
    assert "mystery_knob" in str(err.value)


def test_missing_fixture_dir_error_names_path(tmp_path):
    config = PipelineConfig.from_file(
        str(CONFIG),
        overrides={"output_dir": str(tmp_path / "out"), "fixture_dir": "nowhere"},
    )
    with pytest.raises(PipelineError) as err:
        run_pipeline(config)
    assert err.value.code == "missing_fixture_dir"
    assert "nowhere" in str(err.value)


def test_missing_input_error(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('posts = "missing.jsonl"\nrelevance_labels = "also_missing.jsonl"\n')
    config = PipelineConfig.from_file(str(bad))
    with pytest.raises(PipelineError) as err:
        run_pipeline(config)
    assert err.value.code == "missing_input"
    assert err.value.stage == "config"


def test_pipeline_error_carries_stage_and_code():
    error = PipelineError("enrich", "stage_failed", "boom")
    assert "stage=enrich" in str(error) and "code=stage_failed" in str(error)


def test_midway_failure_names_stage_and_keeps_partial_artifacts(tmp_path):
    truncated = tmp_path / "botness.csv"
    truncated.write_text("author_id,botness\nanalyst01,0.1\n")  # most authors missing
    outdir = tmp_path / "out"
    config = PipelineConfig.from_file(
        str(CONFIG),
        overrides={"output_dir": str(outdir), "botness_scores": str(truncated)},
    )
    with pytest.raises(PipelineError) as err:
        run_pipeline(config)
    assert err.value.stage == "botml"
    assert err.value.code == "stage_failed"
    # everything before the failing stage is retained for resume
    for artifact in ("posts.jsonl", "tokens.jsonl", "iocs.jsonl", "verdicts.jsonl", "features.csv"):
        assert (outdir / artifact).exists(), artifact


def test_verdicts_cover_every_pair(tmp_path):
    outdir = _run(tmp_path)
    iocs = list(read_jsonl(outdir / "iocs.jsonl"))
    verdicts = list(read_jsonl(outdir / "verdicts.jsonl"))
    assert len(verdicts) == len(iocs) * 6
    failures = list(read_jsonl(outdir / "enrich_failures.jsonl"))
    assert failures == []


def test_cli_stagewise_flow(tmp_path):
    work = tmp_path
    posts = str(FIXTURES / "posts.jsonl")

    assert cli_main(["ingest", posts, str(work / "posts.jsonl"), "--stats", str(work / "stats.json")]) == 0
    assert cli_main(["preprocess", str(work / "posts.jsonl"), str(work / "tokens.jsonl")]) == 0
    assert (
        cli_main(
            [
                "train-text",
                "--tokens", str(work / "tokens.jsonl"),
                "--labels", str(FIXTURES / "relevance_labels.jsonl"),
                "--out", str(work / "text_model.json"),
            ]
        )
        == 0
    )
    assert (
        cli_main(
            [
                "classify-tweets",
                str(work / "tokens.jsonl"),
                str(work / "relevant.jsonl"),
                "--model", str(work / "text_model.json"),
            ]
        )
        == 0
    )
    assert cli_main(["extract", str(work / "posts.jsonl"), str(work / "iocs.jsonl")]) == 0
    assert (
        cli_main(
            [
                "enrich",
                str(work / "iocs.jsonl"),
                str(work / "verdicts.jsonl"),
                "--provider", "fixture",
                "--fixture-dir", str(FIXTURES / "verdicts"),
                "--cache", str(work / "cache"),
            ]
        )
        == 0
    )
    assert (
        cli_main(
            [
                "metrics",
                "--iocs", str(work / "iocs.jsonl"),
                "--verdicts", str(work / "verdicts.jsonl"),
                "--outdir", str(work / "metrics"),
            ]
        )
        == 0
    )
    assert (
        cli_main(
            [
                "features",
                "--posts", str(work / "posts.jsonl"),
                "--accounts", str(FIXTURES / "accounts.jsonl"),
                str(work / "features.csv"),
            ]
        )
        == 0
    )
    assert (
        cli_main(
            [
                "train-bot",
                "--features", str(work / "features.csv"),
                "--scores", str(FIXTURES / "botness.csv"),
                "--out", str(work / "bot_model.json"),
                "--kind", "decision_tree",
            ]
        )
        == 0
    )
    assert (
        cli_main(
            [
                "predict-bot",
                "--model", str(work / "bot_model.json"),
                "--features", str(work / "features.csv"),
                str(work / "preds.csv"),
            ]
        )
        == 0
    )
    assert (
        cli_main(
            [
                "explain",
                "--model", str(work / "bot_model.json"),
                "--features", str(work / "features.csv"),
                "--method", "lime",
                "--instance", "feedbot",
                str(work / "explain.csv"),
            ]
        )
        == 0
    )
    assert (
        cli_main(
            [
                "explain",
                "--model", str(work / "bot_model.json"),
                "--features", str(work / "features.csv"),
                "--scores", str(FIXTURES / "botness.csv"),
                "--method", "perm",
                str(work / "perm.csv"),
            ]
        )
        == 0
    )

    # timelines-shaped input produces the same feature rows
    accounts = {a["author_id"]: a for a in read_jsonl(FIXTURES / "accounts.jsonl")}
    grouped = {}
    for post in read_jsonl(work / "posts.jsonl"):
        grouped.setdefault(post["author_id"], []).append(post)
    with open(work / "timelines.jsonl", "w") as fh:
        for author, posts_rows in grouped.items():
            fh.write(json.dumps({"account": accounts[author], "posts": posts_rows}) + "\n")
    assert cli_main(["features", "--timelines", str(work / "timelines.jsonl"), str(work / "features2.csv")]) == 0
    assert read_csv(work / "features2.csv") == read_csv(work / "features.csv")
    assert (work / "metrics" / "metrics_summary.txt").exists()

    header, rows = read_csv(work / "preds.csv")
    assert header == ["author_id", "probability", "predicted_bot"]
    predicted = {row[0]: row[2] for row in rows}
    assert predicted["feedbot"] == "1"
    assert predicted["analyst01"] == "0"
    header, rows = read_csv(work / "explain.csv")
    assert header == ["instance_id", "scale", "feature", "contribution"]
    assert rows and rows[0][0] == "feedbot"


def test_cli_run_and_error_paths(tmp_path):
    assert (
        cli_main(["run", "--config", str(CONFIG), "--outdir", str(tmp_path / "out")]) == 0
    )
    assert cli_main(["run", "--config", str(CONFIG), "--outdir", str(tmp_path / "out2"), "--provider", "fixture"]) == 0
    bad = tmp_path / "bad.toml"
    bad.write_text("mystery = 1\n")
    assert cli_main(["run", "--config", str(bad)]) == 2
