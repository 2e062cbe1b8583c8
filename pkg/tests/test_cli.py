import json
import subprocess
import sys

import pytest

from somarena.cli import EXIT_ARCHIVE, EXIT_CONFIG, EXIT_OK, main


def tree_bytes(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def learn(configs):
    return str(configs / "learnability.toml")


@pytest.fixture(autouse=True)
def fixed_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def test_run_writes_artifacts(tmp_path, learn, capsys):
    assert main(["run", "--config", learn, "--out", str(tmp_path)]) == EXIT_OK
    for name in ("config.json", "report.txt", "report.json"):
        assert (tmp_path / name).exists()
    assert len(list((tmp_path / "models").glob("*.somm"))) == 2
    assert len(list((tmp_path / "logs").rglob("*.jsonl"))) == 10
    assert "somarena match report" in capsys.readouterr().out


def test_run_twice_is_byte_identical(tmp_path, learn):
    for d in ("a", "b"):
        assert main(["run", "--config", learn, "--out", str(tmp_path / d)]) == EXIT_OK
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")


def test_seed_override_changes_logs(tmp_path, learn):
    main(["run", "--config", learn, "--out", str(tmp_path / "a")])
    main(["run", "--config", learn, "--out", str(tmp_path / "b"), "--seed", "99"])
    report = json.loads((tmp_path / "b" / "report.json").read_text())
    assert report["config"]["match"]["seed"] == 99
    assert (tmp_path / "a" / "report.json").read_bytes() != (tmp_path / "b" / "report.json").read_bytes()


def test_report_rerenders(tmp_path, learn, capsys):
    main(["run", "--config", learn, "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["report", "--out", str(tmp_path)]) == EXIT_OK
    assert capsys.readouterr().out == (tmp_path / "report.txt").read_text()
    assert main(["report", "--out", str(tmp_path), "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["format"] == "somarena-report 1"


def test_export_import_round_trip(tmp_path, learn):
    assert main(["export-model", "--config", learn, "--out", str(tmp_path / "x"), "--agent", "som"]) == EXIT_OK
    archive = tmp_path / "x" / "som.somm"
    assert archive.read_bytes().startswith(b"SOMARENA-MODEL 1\n")
    assert main(["import-model", "--config", learn, "--out", str(tmp_path / "y"), "--agent", "som",
                 "--archive", str(archive), "--frozen"]) == EXIT_OK
    frozen = sorted((tmp_path / "y" / "models").glob("*.somm"))
    assert all(p.read_bytes() == archive.read_bytes() for p in frozen)


def test_exit_codes(tmp_path, learn):
    assert main(["run", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) == EXIT_CONFIG
    bad = tmp_path / "bad.toml"
    bad.write_text("[game]\nkind = 'g08a'\nnum_players = 2\nhorizon = 3\n[backends.x]\nkind = 'http'\napi_key = 'sk'\n")
    assert main(["validate-config", "--config", str(bad)]) == EXIT_CONFIG
    corrupt = tmp_path / "c.somm"
    corrupt.write_bytes(b"SOMARENA-MODEL 1\n{broken")
    assert main(["import-model", "--config", learn, "--out", str(tmp_path / "o"), "--agent", "som",
                 "--archive", str(corrupt)]) == EXIT_ARCHIVE
    assert main(["export-model", "--config", learn, "--out", str(tmp_path / "e"), "--agent", "follow"]) == EXIT_CONFIG
    assert main(["run", "--config", learn, "--out", str(tmp_path / "p"), "--backend", "ghost"]) == EXIT_CONFIG
    assert main(["validate-config", "--config", learn]) == EXIT_OK


def test_no_key_flag_exists(learn):
    with pytest.raises(SystemExit):
        main(["run", "--config", learn, "--out", "x", "--api-key", "sk-1"])


def test_ablation_writes_table(tmp_path, learn):
    assert main(["run", "--config", learn, "--out", str(tmp_path), "--ablation"]) == EXIT_OK
    rows = json.loads((tmp_path / "ablation.json").read_text())["rows"]
    assert [r["variant"] for r in rows][-1] == "+ Reasoning Examples (SOM)"


def test_module_entry_point(learn):
    proc = subprocess.run([sys.executable, "-m", "somarena.cli", "validate-config", "--config", learn],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("ok:")
