import csv
import io
import json
import math

import pytest

from capcone import barriers, cli
from capcone.errors import NonConvergence


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_at_right_angle(tmp_path, capsys):
    out = tmp_path / "profile.csv"
    code, _, _ = run(capsys, "cone", "solve", "--n", "7", "--k", "1", "--theta", "90", "--degrees",
                     "--out", str(out))
    assert code == 0
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["a"] == pytest.approx(math.sqrt(1 / 5), abs=1e-6)
    assert side["terminal"]["kind"] == "lawson"
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == cli.PROFILE_POINTS
    assert float(rows[-1]["f"]) == pytest.approx(0.0, abs=1e-8)


def test_solve_with_eps(capsys):
    code, out, _ = run(capsys, "cone", "solve", "--n", "7", "--k", "1", "--eps", "1e-3", "--format", "json")
    assert code == 0
    side = json.loads(out)["sidecar"]
    assert side["eps"] == 1e-3
    assert side["terminal"]["value"] == pytest.approx(-1e-3, abs=1e-9)


@pytest.mark.parametrize("argv", [
    ["cone", "solve", "--n", "7", "--k", "6", "--theta", "1.0"],
    ["cone", "solve", "--n", "7", "--k", "1"],
    ["barriers", "super", "--n", "7", "--k", "1", "--beta", "-0.5"],
    ["barriers", "sub", "--n", "7", "--k", "1", "--alpha", "0.5"],
    ["fb", "caps", "--n", "7", "--k", "5", "--side", "plus"],
    ["table", "reproduce", "appendix", "--rows", "7:1"],
])
def test_invalid_input_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_INVALID
    assert err.startswith("error:")


def test_verify_super_passes(capsys):
    code, out, _ = run(capsys, "verify", "super", "--n", "12", "--k", "9", "--beta", "-4")
    assert code == 0
    rec = json.loads(out)["rows"][0]
    assert rec["matched"] is True and rec["all_ok"] is True


def test_super_condition_failure_is_mismatch(capsys):
    code, out, _ = run(capsys, "barriers", "super", "--n", "9", "--k", "5", "--beta", "-6.5")
    assert code == cli.EXIT_MISMATCH
    assert json.loads(out)["rows"][0]["status"] == "ConditionFailed"


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise NonConvergence("forced")
    monkeypatch.setattr(barriers, "verify_supersolution", boom)
    code, _, _ = run(capsys, "barriers", "super", "--n", "12", "--k", "9", "--beta", "-4")
    assert code == cli.EXIT_NUMERICAL
    monkeypatch.setattr(barriers, "check_subsolution", boom)
    code, _, err = run(capsys, "barriers", "sub", "--n", "7", "--k", "1")
    assert code == cli.EXIT_NUMERICAL and "NonConvergence" in err


def test_verify_indicial_and_caps(capsys):
    assert run(capsys, "verify", "indicial", "--n", "7")[0] == 0
    assert run(capsys, "verify", "indicial", "--n", "8")[0] == 0
    code, out, _ = run(capsys, "verify", "indicial", "--n", "6")
    assert code == cli.EXIT_MISMATCH and json.loads(out)["rows"][0]["complex_roots"] is True
    code, out, _ = run(capsys, "verify", "caps", "--n", "7", "--k", "1")
    rec = json.loads(out)["rows"][0]
    assert code == 0 and rec["cubic_min"] == pytest.approx(11 - 3 * math.sqrt(5))


def test_sub_mismatch(capsys):
    code, out, _ = run(capsys, "verify", "sub", "--n", "7", "--k", "1", "--alpha", "-0.1")
    assert code == cli.EXIT_MISMATCH
    assert json.loads(out)["rows"][0]["verdict"] is False


def test_csv_format(tmp_path, capsys):
    out = tmp_path / "sub.csv"
    code, _, _ = run(capsys, "barriers", "sub", "--n", "7", "--k", "1", "--format", "csv", "--out", str(out))
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert rows[0]["verdict"] == "true"
    margin = rows[0]["margin"]
    assert float(margin) == float(repr(float(margin)))
    assert repr(barriers.check_subsolution(__import__("capcone").ConePair(7, 1), -3.23).margin) \
        == repr(float(margin))


def test_json_keys_sorted(capsys):
    _, out, _ = run(capsys, "fb", "eps", "--n", "7", "--k", "1", "--eps", "1e-3")
    body = json.loads(out)
    keys = list(body["rows"][0])
    assert keys == sorted(keys)
    assert out.rstrip("\n") == json.dumps(body, sort_keys=True, indent=2)


def test_parallel_output_identical(tmp_path, capsys):
    one, two = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "table", "reproduce", "alpha", "--n", "8", "--out", str(one))[0] == 0
    assert run(capsys, "table", "reproduce", "alpha", "--n", "8", "--jobs", "2", "--out", str(two))[0] == 0
    assert one.read_bytes() == two.read_bytes()
    assert one.with_suffix(".json").read_bytes() == two.with_suffix(".json").read_bytes()


def test_sweep_heights(capsys):
    code, out, _ = run(capsys, "family", "sweep", "--n", "7", "--k", "1", "--format", "json")
    assert code == 0
    members = json.loads(out)["summary"]["members"]
    kinds = [m["terminal"] for m in members]
    assert kinds.count("lawson") == 1 and "blowup" in kinds and "zero" in kinds
    lawson = next(m for m in members if m["lawson"])
    assert lawson["positive_end"] == pytest.approx(math.sqrt(1 / 6), abs=1e-9)


def test_sweep_lambda_ordered(capsys):
    code, out, _ = run(capsys, "family", "sweep", "--n", "7", "--k", "1", "--mode", "lambda", "--format", "json")
    assert code == 0 and json.loads(out)["summary"]["ordered"] is True


def test_scan_beta(capsys):
    code, out, _ = run(capsys, "barriers", "scan-beta", "--n", "9", "--k", "5", "--betas=-6.5,-3",
                       "--format", "json")
    body = json.loads(out)
    assert code == 0
    assert body["summary"]["inf_estimate"] == -3.0
    assert [r["failure"] for r in body["rows"]] == ["ConditionFailed", None]


def test_quadratics_table_lists_nine_five(capsys):
    from capcone.reference import quadratic_examples
    rows = {(r["n"], r["k"]): r["beta"] for r in quadratic_examples()}
    assert rows[(9, 5)] == -3
    code, out, _ = run(capsys, "table", "reproduce", "quadratics", "--n", "9", "--format", "json")
    assert code == 0
    assert json.loads(out)["rows"][0]["all_ok"] is True


def test_appendix_rows_selection(capsys):
    code, out, _ = run(capsys, "table", "reproduce", "appendix", "--rows", "7:2:-2.5", "--format", "json")
    body = json.loads(out)
    assert code == 0 and body["summary"]["rows"] == 1
    assert body["rows"][0]["matched"] is True
