import json
import os
import subprocess
from pathlib import Path

import pytest

ROOT = Path(os.environ.get("MMA2A_SOURCE_DIR", Path(__file__).resolve().parents[2]))
CLI = os.environ.get("MMA2A_CLI", str(ROOT / "build" / "mma2a"))
MANIFEST = ROOT / "data" / "crossmodal_cs" / "manifest.json"


def run(*args, timeout=240):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=timeout)


def test_validate_manifest():
    r = run("validate-manifest", MANIFEST)
    assert r.returncode == 0, r.stderr
    assert "50 tasks" in r.stdout


def test_broken_manifest_exits_2(tmp_path):
    bad = tmp_path / "manifest.json"
    bad.write_text("{ not json")
    assert run("validate-manifest", bad).returncode == 2
    assert run("validate-manifest", tmp_path / "missing.json").returncode == 2


@pytest.mark.parametrize(
    "args",
    [
        ["experiment"],  # no seed
        ["experiment", "--seed", "1", "--mode", "native"],
        ["experiment", "--seed", "1", "--backend", "oracle"],
        ["experiment", "--seed", "1", "--delay-profile", "glacial"],
    ],
)
def test_config_errors_exit_2(args, tmp_path):
    r = run(*args, "--manifest", MANIFEST, "--out", tmp_path)
    assert r.returncode == 2, r.stdout + r.stderr
    assert not any(tmp_path.iterdir()), "no run directory for a rejected config"


def test_experiment_then_report(tmp_path):
    r = run("experiment", "--seed", "3", "--resamples", "500", "--manifest", MANIFEST, "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    (run_dir,) = list(tmp_path.iterdir())
    for name in [
        "config.json",
        "run.log.jsonl",
        "results_baseline.jsonl",
        "results_treatment.jsonl",
        "telemetry_baseline.jsonl",
        "telemetry_treatment.jsonl",
        "report.json",
        "report.md",
    ]:
        assert (run_dir / name).is_file(), name
    assert not (run_dir / "blobs").exists()

    first = json.loads((run_dir / "report.json").read_text())
    assert first["arms"]["baseline"]["tca_pct"] == pytest.approx(32.0)
    assert first["arms"]["treatment"]["tca_pct"] == pytest.approx(52.0)

    events = [json.loads(line) for line in (run_dir / "run.log.jsonl").read_text().splitlines()]
    assert sum(1 for e in events if e.get("event") == "task") == 100

    (run_dir / "report.json").unlink()
    r = run("report", run_dir, "--resamples", "500")
    assert r.returncode == 0, r.stderr
    again = json.loads((run_dir / "report.json").read_text())
    assert again == first


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "backend": "no-such-backend", "resamples": 200}))
    out = tmp_path / "runs"
    # The file's backend is invalid; the flag overrides it.
    r = run("experiment", "--config", cfg, "--backend", "keyword", "--manifest", MANIFEST, "--out", out)
    assert r.returncode == 0, r.stderr
    (run_dir,) = list(out.iterdir())
    assert "keyword" in run_dir.name
    assert json.loads((run_dir / "config.json").read_text())["seed"] == 5
