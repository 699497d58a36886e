import io
import json

import pytest

from dprocess.cli import main


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_predict_example():
    code, text = run(["predict", "--n", "1000", "--d", "3", "--s", "0"])
    assert code == 0
    res = json.loads(text)
    assert res["ell_inverse"] == 0 and res["beta"][0] == 1000


def test_predict_deficit():
    code, text = run(["predict", "--n", "100000", "--d", "2", "--t", "7", "--x", "1000"])
    assert code == 0
    res = json.loads(text)
    assert len(res["f"]) == 1 and res["tau"] > 0


def test_oracle_example():
    code, text = run(["oracle", "--n", "4", "--d", "2", "--query", "nonsat"])
    assert code == 0
    assert json.loads(text)["nonsat"] == "4/15"


def test_oracle_degrees_and_outcome():
    code, text = run(["oracle", "--n", "4", "--d", "2", "--query", "degrees", "--s", "3"])
    assert code == 0 and json.loads(text)["step"] == 3
    code, text = run(["oracle", "--n", "3", "--d", "2", "--query", "outcome"])
    assert code == 0 and len(json.loads(text)["entries"]) == 1
    assert run(["oracle", "--n", "4", "--d", "2", "--query", "degrees"])[0] == 1


def test_run_example():
    code, text = run(["run", "--kind", "saturation", "--n", "2", "--d", "2", "--trials", "10", "--seed", "1"])
    assert code == 0
    res = json.loads(text)
    assert res["summary"]["p_hat"] == 1.0 and res["rows"][0]["nonsaturated"] == 10


def test_run_from_config_file(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"kind": "survival", "n": 200, "d": 2, "trials": 4}))
    out = tmp_path / "o.jsonl"
    code, text = run(["run", "--config", str(conf), "--trials", "3", "--output", str(out)])
    assert code == 0
    assert json.loads(text)["summary"]["trials"] == 3
    assert len(out.read_text().splitlines()) == 5
    assert (tmp_path / "o.csv").exists()


@pytest.mark.parametrize("argv", [
    ["--bogus"],
    [],
    ["run", "--kind", "saturation"],
    ["run", "--kind", "saturation", "--n", "5", "--d", "2", "--trials", "0"],
    ["run", "--kind", "saturation", "--n", "x", "--d", "2", "--trials", "1"],
    ["predict", "--n", "10", "--d", "1"],
    ["oracle", "--n", "4", "--d", "2", "--frobnicate"],
    ["run", "--help-me"],
])
def test_usage_errors(argv, capsys):
    assert run(argv)[0] == 1
    assert "error" in capsys.readouterr().err


def test_unknown_flag_prints_usage(capsys):
    assert run(["predict", "--wat"])[0] == 1
    assert "usage:" in capsys.readouterr().err


@pytest.mark.parametrize("cmd", ["run", "oracle", "predict"])
def test_help(cmd, capsys):
    assert run([cmd, "--help"])[0] == 0
    assert "usage:" in capsys.readouterr().out


def test_runtime_errors():
    assert run(["oracle", "--n", "7", "--d", "2", "--budget", "10"])[0] == 2
    assert run(["predict", "--n", "10", "--d", "2", "--s", "10"])[0] == 2
    assert run(["run", "--kind", "saturation", "--n", "5", "--d", "2", "--trials", "1",
                "--output", "/nonexistent/x.jsonl"])[0] == 2
