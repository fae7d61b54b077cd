import json
from pathlib import Path

from ecoexp.cli import main

BIOS_FIXTURE = Path(__file__).resolve().parents[1] / "src" / "ecoexp" / "fixtures" / "bios"


def test_analyze_bios_fixture_prints_coverage(capsys):
    code = main(["analyze", str(BIOS_FIXTURE)])
    out = capsys.readouterr().out
    assert code == 0
    assert "78.57%" in out
    assert "71.43%" in out
    assert "14 pairs" in out


def test_analyze_writes_analytics_json(tmp_path, capsys):
    target = tmp_path / "analytics.json"
    code = main(["analyze", str(BIOS_FIXTURE), "--out", str(target)])
    capsys.readouterr()
    assert code == 0
    doc = json.loads(target.read_text(encoding="utf-8"))
    assert len(doc["parameter_space"]) == 14


def test_simulate_learners_writes_bundle(tmp_path, capsys):
    out = tmp_path / "run"
    script = {
        "phases": [{"name": "Phase I", "sessions": 1}],
        "learners": 2,
        "seed": 7,
    }
    script_path = tmp_path / "script.json"
    script_path.write_text(json.dumps(script), encoding="utf-8")
    code = main(["simulate-learners", str(script_path), "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    assert (out / "events.jsonl").exists()
    assert (out / "analytics.json").exists()
    assert (out / "experiment.json").exists()


def test_create_rejects_three_groups(tmp_path, capsys):
    spec = {"name": "bad", "groups": [{}, {}, {}]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec), encoding="utf-8")
    code = main(["create", str(path)])
    capsys.readouterr()
    assert code == 1


def test_create_prints_links(tmp_path, capsys):
    spec = {"name": "ok", "mode": "manual", "groups": [{}, {}]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec), encoding="utf-8")
    code = main(["create", str(path), "--data-dir", str(tmp_path / "data")])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("/researcher/join-experiment?group=") == 2


def test_links_reads_persisted_state(tmp_path, capsys):
    spec = {"name": "ok", "mode": "manual", "groups": [{}, {}]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec), encoding="utf-8")
    assert main(["create", str(path), "--data-dir", str(tmp_path / "data")]) == 0
    created = capsys.readouterr().out
    experiment_id = json.loads(created.split("\nhttp", 1)[0])["id"]
    code = main(["links", experiment_id, "--data-dir", str(tmp_path / "data")])
    out = capsys.readouterr().out
    assert code == 0
    assert out.count("join-experiment?group=") == 2


def test_unknown_flag_exits_one(capsys):
    code = main(["analyze", "--definitely-not-a-flag"])
    capsys.readouterr()
    assert code == 1


def test_report_renders_tables_and_svg(tmp_path, capsys):
    analytics = tmp_path / "analytics.json"
    main(["analyze", str(BIOS_FIXTURE), "--out", str(analytics)])
    capsys.readouterr()
    charts = tmp_path / "charts"
    code = main(["report", str(analytics), "--out", str(charts)])
    out = capsys.readouterr().out
    assert code == 0
    assert "coverage" in out.lower()
    svg = (charts / "coverage.svg").read_text(encoding="utf-8")
    assert svg.startswith("<svg")
    assert (charts / "patterns.svg").exists()


def test_missing_file_exits_one(capsys):
    code = main(["analyze", "/nope/missing.jsonl"])
    capsys.readouterr()
    assert code == 1  # click validates the path before we touch the filesystem
