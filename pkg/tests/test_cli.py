import csv
import io
import json

import pytest

from bftest.cli import main
from bftest.harness import CSV_HEADER


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_to_stdout(capsys):
    code, out, err = run(capsys, "run", "--tester", "blr", "--n", "8", "--trials", "5")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == CSV_HEADER and len(rows) == 6
    assert json.loads(err)["summary"]["accepts"] == 5


def test_run_to_files(tmp_path, capsys):
    out_csv, out_json = tmp_path / "r.csv", tmp_path / "s.json"
    code, out, _ = run(capsys, "run", "--tester", "psf", "--n", "16", "--k", "1", "--trials", "4",
                       "--seed", "2", "--csv", str(out_csv), "--json", str(out_json))
    assert code == 0 and out == ""
    doc = json.loads(out_json.read_text())
    assert doc["config"]["tester"] == "psf" and doc["config"]["seed"] == 2
    assert len(out_csv.read_text().splitlines()) == 5


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("tester = symmetric\nn = 32\nmodel = passive\ntrials = 3\nseed = 6\n")
    out_json = tmp_path / "s.json"
    code, _, _ = run(capsys, "run", "--config", str(cfg), "--trials", "7", "--json", str(out_json))
    doc = json.loads(out_json.read_text())
    assert code == 0 and doc["config"]["trials"] == 7 and doc["config"]["model"] == "passive"


def test_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("BFTEST_SEED", "1234")
    _, _, err = run(capsys, "run", "--tester", "blr", "--n", "6", "--trials", "2")
    assert json.loads(err)["config"]["seed"] == 1234
    _, a, _ = run(capsys, "run", "--tester", "symmetric", "--n", "20", "--trials", "5")
    _, b, _ = run(capsys, "run", "--tester", "symmetric", "--n", "20", "--trials", "5",
                  "--seed", "1234")
    assert a == b


def test_errors_give_exit_codes(tmp_path, capsys):
    code, _, err = run(capsys, "run", "--tester", "junta", "--n", "20", "--k", "2")
    assert code == 2 and "junta" in err
    code, _, _ = run(capsys, "run", "--tester", "blr")
    assert code == 2
    code, _, err = run(capsys, "run", "--tester", "blr", "--n", "4", "--trials", "1",
                       "--csv", str(tmp_path / "no" / "r.csv"))
    assert code == 3 and "no" in err


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--tester", "passive_linear", "--n", "10", "--trials", "5",
                       "--grid", "q=12,20", "--grid", "target=member,far")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [(r["q"], r["target"]) for r in rows] == [
        ("12", "member"), ("12", "far"), ("20", "member"), ("20", "far")]
    assert rows[0]["acceptance_rate"] == "1.000000"


@pytest.mark.parametrize("argv,first", [
    (["pisy", "--q", "2", "4", "--trials", "20"], "n,k,q,statistic,ci_lo,ci_hi,regime_label"),
    (["sumset", "--trials", "50"], "group,n,k,y,trials,mean,expected,statistic"),
    (["sunflower", "--families", "20"], "a,b,size,families,statistic"),
    (["cayley", "--N", "500", "--draws", "2"], "N,d,k,steps,statistic"),
])
def test_lb_subcommands(capsys, argv, first):
    code, out, _ = run(capsys, "lb", *argv, "--seed", "1")
    assert code == 0 and out.startswith(first)
    assert out.splitlines()[0].split(",")[-4:] in (
        ["statistic", "ci_lo", "ci_hi", "regime_label"],
        ["ci_lo", "ci_hi", "regime_label", "set_rate"])


@pytest.mark.parametrize("check", ["blr", "parseval", "sumset", "linear-distance"])
def test_oracle_checks_pass(capsys, check):
    code, out, _ = run(capsys, "oracle", check, "--n", "5", "--count", "3", "--seed", "0")
    assert code == 0 and "FAIL" not in out
