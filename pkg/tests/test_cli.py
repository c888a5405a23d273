import json

import pytest

from keane.cli import main

RUNS = [
    ["params", "--rule", "minimal-admissible", "--K", "4"],
    ["params", "--rule", "flip11", "--K", "3", "--format", "csv"],
    ["verify", "--K-max", "2", "--r", "3"],
    ["verify", "--K-max", "2", "--r", "3", "--format", "csv"],
    ["dimension", "--K", "2"],
    ["dimension", "--K", "2", "--format", "csv", "--direction", "3"],
    ["generic", "--k", "1"],
    ["generic", "--k", "1", "--format", "csv"],
    ["recurrence", "--seed", "5", "--samples", "2", "--N", "300"],
    ["recurrence", "--seed", "5", "--samples", "2", "--N", "300", "--format", "csv"],
]


def run(argv, tmp_path, name="out.txt"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out.read_bytes() if out.exists() else b""


@pytest.mark.parametrize("argv", RUNS, ids=lambda a: "-".join(a[:1] + a[-2:]))
def test_reruns_are_byte_identical(argv, tmp_path):
    c1, a = run(argv, tmp_path, "a")
    c2, b = run(argv, tmp_path, "b")
    assert c1 == c2 == 0
    assert a == b and a


def test_config_equals_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "params", "rule": "generic", "K": 3}))
    assert run(["params", "--config", str(cfg)], tmp_path, "a") == run(
        ["params", "--rule", "generic", "--K", "3"], tmp_path, "b")


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rule": "generic", "K": 3}))
    code, text = run(["params", "--config", str(cfg), "--K", "2"], tmp_path)
    assert code == 0 and len(json.loads(text)["pairs"]) == 2


@pytest.mark.parametrize("data", [{"bogus": 1}, {"command": "verify"}, [1, 2]])
def test_bad_config_is_usage_error(data, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(data))
    assert main(["params", "--config", str(cfg)]) == 2


@pytest.mark.parametrize("argv", [
    ["params", "--rule", "nope"],
    ["params"],
    ["recurrence", "--N", "10"],
    ["dimension", "--direction", "5"],
    ["frobnicate"],
    ["params", "--rule", "alpha2", "--alpha", "2"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_failed_verification_exit_code(capsys):
    # m_1 = n_1 breaks the admissibility hypotheses and the lemma bounds
    assert main(["verify", "--rule", "flip00", "--K-max", "1", "--r", "3"]) == 1


def test_resource_exit_codes(capsys):
    assert main(["params", "--rule", "alpha2", "--alpha", "1/2", "--K", "12"]) == 3
    assert main(["recurrence", "--seed", "1", "--budget", "10", "--N", "5"]) == 3


def test_explicit_file(tmp_path, capsys):
    f = tmp_path / "seq.json"
    f.write_text(json.dumps({"rule": "explicit", "pairs": [[33, 10], [201, 66]]}))
    assert main(["params", "--file", str(f), "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines() == ["k,m,n", "1,33,10", "2,201,66"]


def test_verify_json_summary(capsys):
    assert main(["verify", "--K-max", "2", "--r", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["FAIL"] == 0
    assert all(o["ok"] for o in report["oracle"])


def test_recurrence_csv_columns(capsys):
    assert main(["recurrence", "--seed", "2", "--samples", "1", "--N", "20", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "sample,n,d_lo,d_hi,stat_lo,stat_hi,running_min_hi"
    assert len(lines) == 21
