import csv
import io
import json

import pytest

from poalab import cli


def run(argv):
    buf = io.StringIO()
    code = cli.main(argv, stdout=buf)
    return code, buf.getvalue()


def test_construct_emits_json():
    code, out = run(["construct", "--construction", "grid", "--n", "2"])
    assert code == 0
    body = json.loads(out)
    assert body["predicted"]["poa"]["value"] == pytest.approx(4 / 3)


def test_verify_exit_codes(tmp_path):
    code, out = run(["verify", "--construction", "subadditive", "--m", "4"])
    assert code == 0 and "PASS" in out
    path = tmp_path / "rep.json"
    code, _ = run(["verify", "--construction", "grid-d", "--n", "4", "--d", "2", "--out", str(path)])
    assert code == 1
    assert json.loads(path.read_text())["verdict"] == "FAIL"


def test_table_csv_has_schema_header():
    code, out = run(["table", "--construction", "grid", "--n", "2..4"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# schema: poalab-table/1"
    rows = list(csv.DictReader(lines[1:]))
    assert [int(r["value"]) for r in rows] == [2, 3, 4]
    assert float(rows[1]["poa"]) == pytest.approx(27 / 19)


def test_bound_csv():
    code, out = run(["bound", "--theta", "0..1", "--steps", "5"])
    rows = list(csv.DictReader(out.splitlines()[1:]))
    assert code == 0 and len(rows) == 5
    assert float(rows[-1]["lambda"]) == 0.5


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("command: poa\nconstruction:\n  name: grid\n  params:\n    n: 2\n")
    code, out = run(["poa", "--config", str(cfg), "--n", "3"])
    assert code == 0
    assert json.loads(out)["construction"]["params"]["n"] == 3


def test_config_errors_name_the_line(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("command: verify\nconstruction:\n  name: grid\nverifier:\n  samples: -4\n")
    code, _ = run(["verify", "--config", str(cfg)])
    assert code == 2
    assert f"{cfg}:5" in capsys.readouterr().err


def test_missing_construction_is_a_usage_error(capsys):
    code, _ = run(["poa"])
    assert code == 2
    assert "construction" in capsys.readouterr().err


def test_seed_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("POA_LAB_SEED", "11")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["verify", "--construction", "grid", "--n", "2", "--method", "monte-carlo", "--samples", "2000", "--out", str(a)])
    monkeypatch.delenv("POA_LAB_SEED")
    run(["verify", "--construction", "grid", "--n", "2", "--method", "monte-carlo", "--samples", "2000",
         "--seed", "11", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
