from __future__ import annotations

import json
import subprocess
import sys

import pytest

from qemac import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


def test_synth_ame_worked_instance(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, text = run(["synth", "--sym", "5", "4", "2", "1", "--mode", "ame", "--seed", "0", "--out", str(out)], capsys)
    assert code == cli.EXIT_OK
    summary = json.loads(text)["summary"]
    assert summary["rate"] == "1/2" and summary["in_region_ame"]
    doc = json.loads(out.read_text())
    assert doc["meta"]["seed"] == 0 and "spec_hash" in doc["meta"] and "version" in doc["meta"]


def test_synth_tqc(capsys):
    code, text = run(["synth", "--sym", "5", "3", "2", "1", "--mode", "tqc", "--seed", "0"], capsys)
    assert code == 0
    s = json.loads(text)["summary"]
    assert s["rate"] == "1/3" and s["costs"][1:] == ["1/1", "1/1", "1/1"] and s["in_region_tqc"]


def test_synth_exit_codes(capsys):
    assert cli.main(["synth", "--sym", "2", "2", "2", "1"]) == cli.EXIT_INFEASIBLE
    assert cli.main(["synth", "--sym", "5", "3", "2", "1", "--retries", "0"]) == cli.EXIT_EXHAUSTED
    assert cli.main(["synth", "--sym", "5", "1", "2", "1"]) == cli.EXIT_INFEASIBLE
    assert cli.main(["bogus"]) == cli.EXIT_USAGE
    assert cli.main(["synth"]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_synth_from_spec_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"d": 5, "S": 3, "alpha": 2, "beta": 1}))
    code, text = run(["synth", "--spec", str(spec), "--mode", "tqc", "--seed", "0"], capsys)
    assert code == 0 and json.loads(text)["summary"]["rate"] == "1/3"


def test_synth_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.main(["synth", "--sym", "5", "3", "2", "1", "--seed", "9", "--out", str(p)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_seed_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("QEMAC_SEED", "9")
    p = tmp_path / "env.json"
    assert cli.main(["synth", "--sym", "5", "3", "2", "1", "--out", str(p)]) == 0
    q = tmp_path / "flag.json"
    monkeypatch.delenv("QEMAC_SEED")
    assert cli.main(["synth", "--sym", "5", "3", "2", "1", "--seed", "9", "--out", str(q)]) == 0
    capsys.readouterr()
    assert p.read_bytes() == q.read_bytes()
    assert json.loads(p.read_text())["meta"]["seed"] == 9


@pytest.mark.parametrize(
    "name,code",
    [
        ("worked_repaired", 0),
        ("cutset_gf8", 0),
        ("tqc_5_3_2_1", 0),
        ("ame_tiny_3_3_2_1", 0),
        ("worked_vdec_corrupt", 2),
        ("worked_verbatim", 2),
        ("tqc_5_3_2_1_D_corrupt", 2),
    ],
)
def test_verify_fixtures(name, code, fixtures_dir, tmp_path, capsys):
    out = tmp_path / "r.json"
    got, text = run(["verify", str(fixtures_dir / f"{name}.json"), "--trials", "200", "--seed", "1", "--out", str(out)], capsys)
    assert got == code
    report = json.loads(out.read_text())
    assert report["report"]["passed"] == (code == 0)
    assert report["meta"]["seed"] == 1


def test_verify_report_deterministic(fixtures_dir, capsys):
    path = str(fixtures_dir / "worked_repaired.json")
    _, a = run(["verify", path, "--trials", "100", "--seed", "2"], capsys)
    _, b = run(["verify", path, "--trials", "100", "--seed", "2"], capsys)
    assert a == b


def test_verify_missing_file(capsys, tmp_path):
    assert cli.main(["verify", str(tmp_path / "nope.json")]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_capacity_grid_csv(capsys):
    code, text = run(["capacity", "--sym", "4", "3", "2", "--grid", "0:2:0.25", "--csv"], capsys)
    assert code == 0
    rows = [r.split(",") for r in text.strip().splitlines()[1:]]
    table = {(r[3], r[4]): (r[5], r[6]) for r in rows}
    assert table[("0", "1")] == ("1", "1")
    assert table[("1", "1")] == ("1", "2")
    assert table[("2", "1")] == ("1", "2")
    assert len(rows) == 9


def test_capacity_sweep_alpha(capsys):
    code, text = run(["capacity", "--sym", "8", ".", "1", "--sweep-alpha", "2:8"], capsys)
    assert code == 0
    caps = [p["capacity"] for p in json.loads(text)["no_helper"]]
    assert caps == ["1/4", "1/2", "3/4", "3/4", "3/4", "3/4", "7/8"]


def test_capacity_single_point(capsys):
    code, text = run(["capacity", "--sym", "3", "2", "1", "--delta0", "0"], capsys)
    assert code == 0
    assert json.loads(text)["points"][0]["delta_star"] == "1/1"
    assert cli.main(["capacity", "--sym", "3", "3", "3"]) == cli.EXIT_INFEASIBLE
    capsys.readouterr()


@pytest.mark.parametrize("builtin", ["bell", "twirl"])
def test_hilbert_builtins(builtin, capsys):
    code, text = run(["hilbert", "--builtin", builtin, "--q", "3"], capsys)
    assert code == 0 and json.loads(text)["passed"]


def test_hilbert_scheme_file(fixtures_dir, capsys):
    code, text = run(["hilbert", str(fixtures_dir / "ame_tiny_3_3_2_1.json"), "--trials", "50"], capsys)
    assert code == 0
    assert all(json.loads(text)["checks"].values())


@pytest.mark.parametrize("which", ["fig1", "sec52", "appA"])
def test_examples(which, capsys):
    code, text = run(["example", "--which", which, "--trials", "100", "--seed", "0"], capsys)
    assert code == 0 and json.loads(text)["report"]["passed"]


def test_example_verbatim_fails(capsys):
    assert cli.main(["example", "--which", "sec52", "--verbatim", "--trials", "50"]) == cli.EXIT_VERIFY
    capsys.readouterr()


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "qemac.cli", "capacity", "--sym", "4", "3", "2", "--delta0", "1"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["points"][0]["delta_star"] == "1/2"
