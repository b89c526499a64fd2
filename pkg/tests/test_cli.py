import json

from hankelcomp.cli import dumps17, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def write_seq(tmp_path, entries, horizon=None, name="seq.json"):
    payload = {"entries": [{"index": k, "value": v} for k, v in entries.items()]}
    if horizon is not None:
        payload["horizon"] = horizon
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_check_exit_codes(tmp_path, capsys):
    good = write_seq(tmp_path, {k: 1 / (k + 1) for k in range(5)})
    code, out = run_cli(capsys, "check", good)
    assert code == 0
    assert json.loads(out)["partial_positive_definite"] is True

    bad = write_seq(tmp_path, {0: 1, 2: 1 / 3, 3: 1 / 7, 4: 0.1}, name="bad.json")
    code, out = run_cli(capsys, "check", bad)
    assert code == 2
    assert json.loads(out)["partial_positive_definite"] is False


def test_classify_negative_exit(capsys):
    code, out = run_cli(capsys, "classify-pattern", "0,1,4", "--horizon", "4")
    assert code == 2
    assert json.loads(out)["status"] == "NOT_PD_COMPLETABLE"
    code, out = run_cli(capsys, "classify-pattern", "1,3,7")
    assert code == 0


def test_complete_and_revalidation(tmp_path, capsys):
    path = write_seq(tmp_path, {0: 1.0, 2: 0.5, 4: 1 / 3}, horizon=4)
    code, out = run_cli(
        capsys, "complete", path, "--horizon", "20", "--strategy", "measure",
        "--d", "2", "--l0", "0",
    )
    assert code == 0
    body = json.loads(out)
    assert body["values"][2] == 0.5
    assert len(body["values"]) == 21


def test_complete_auto_dispatch(tmp_path, capsys):
    path = write_seq(tmp_path, {1: 0.1, 3: 0.05, 5: 0.01}, horizon=6)
    code, out = run_cli(capsys, "complete", path, "--horizon", "10")
    assert code == 0
    assert json.loads(out)["strategy"] == "schur"


def test_error_exit(tmp_path, capsys):
    path = write_seq(tmp_path, {0: 1.0, 1: 0.4, 2: 0.5, 4: 0.4}, name="unk.json")
    code, out = run_cli(capsys, "complete", path, "--horizon", "6")
    assert code == 1
    assert json.loads(out)["error"]["kind"] == "UnsupportedPattern"

    missing = str(tmp_path / "nope.json")
    code, out = run_cli(capsys, "check", missing)
    assert code == 1
    assert "error" in json.loads(out)


def test_measure_extract_cli(tmp_path, capsys):
    path = tmp_path / "mom.json"
    path.write_text("[2, 6, 18, 54, 162]")
    code, out = run_cli(capsys, "measure", "extract", str(path))
    assert code == 0
    body = json.loads(out)
    assert abs(body["atoms"][0]["location"] - 3) < 1e-9


def test_oracle_cli(tmp_path, capsys):
    path = write_seq(tmp_path, {0: 1, 1: 0.5, 4: 1 / 16}, horizon=4)
    code, out = run_cli(capsys, "oracle", path, "--order", "2")
    assert code == 2
    assert json.loads(out)["feasible"] is False


def test_witness_cli(capsys):
    code, out = run_cli(
        capsys, "witness", "0,3,4", "--order", "2", "--budget", "4000", "--seed", "5"
    )
    assert code == 2
    assert json.loads(out)["witness"] is not None


def test_seventeen_digit_floats_and_determinism(tmp_path, capsys):
    assert dumps17({"x": 1 / 3}) == '{\n  "x": 0.33333333333333331\n}'
    assert dumps17([0.1]) == "[\n  0.10000000000000001\n]"
    path = write_seq(tmp_path, {0: 1.0, 2: 0.5, 4: 1 / 3}, horizon=4)
    args = ("complete", path, "--horizon", "16", "--strategy", "measure", "--d", "2", "--l0", "0")
    _, out1 = run_cli(capsys, *args)
    _, out2 = run_cli(capsys, *args)
    assert out1 == out2  # byte-identical runs
    # round-trip through 17 significant digits is exact
    val = json.loads(out1)["values"][7]
    assert float(format(val, ".17g")) == val


def test_not_completable_exit_two(tmp_path, capsys):
    path = write_seq(tmp_path, {0: 1.0, 1: 0.5, 4: 1 / 16}, horizon=4)
    code, out = run_cli(capsys, "complete", path, "--horizon", "6")
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "NotCompletable"
