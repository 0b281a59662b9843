import json
from fractions import Fraction

import pytest

from altbinom import exact
from altbinom.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_ok(capsys):
    code, out, _ = run(capsys, "verify", "-n", "2", "-m", "1", "--theta", "1/2")
    assert code == 0
    assert "8/15 = 8/15" in out and "VERIFIED" in out


def test_verify_n0(capsys):
    code, out, _ = run(capsys, "verify", "-n", "0", "-m", "1", "--theta", "7")
    assert code == 0 and "1 = 1" in out


def test_verify_pole(capsys):
    code, _, err = run(capsys, "verify", "-n", "3", "-m", "1", "--theta", "-2")
    assert code == 2 and "theta=-2" in err


def test_verify_failure_exit1(capsys, monkeypatch):
    monkeypatch.setattr(exact, "rhs_general", lambda inst: Fraction(-1))
    code, out, _ = run(capsys, "verify", "-n", "2", "--theta", "1")
    assert code == 1 and "FAILED" in out


def test_verify_grid(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"n": [0, 1, 2], "m": [1, 3], "theta": ["1/2", "5"]}))
    code, out, _ = run(capsys, "verify", "--grid", str(path))
    assert code == 0 and out.count("VERIFIED") == 12


def test_decimal_theta_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "-n", "2", "--theta", "0.1"])
    assert exc.value.code == 2
    assert "exact" in capsys.readouterr().err


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "-n", "2", "--theta", "1", "--bogus"])
    assert exc.value.code == 2


def test_eval_all(capsys):
    code, out, _ = run(capsys, "eval", "-n", "60", "-m", "1", "--theta", "1", "--all")
    assert code == 0
    rows = {line.split(",")[0]: line.split(",") for line in out.splitlines()[1:]}
    assert float(rows["NaiveSum"][3]) >= 1e-2
    assert float(rows["ProductForm"][3]) <= 1e-13


def test_eval_symdp(capsys):
    code, out, _ = run(capsys, "eval", "-n", "2", "-m", "2", "--theta", "1", "--strategy", "symdp")
    assert code == 0
    value = float(out.splitlines()[1].split(",")[1])
    assert value == pytest.approx(0.6111111111111112, rel=1e-15)


def test_eval_cap(capsys):
    code, _, err = run(capsys, "eval", "-n", "5000", "-m", "1", "--theta", "1")
    assert code == 2 and "1000" in err


def test_eval_inapplicable(capsys):
    code, _, _ = run(capsys, "eval", "-n", "3", "-m", "2", "--theta", "1", "--strategy", "product")
    assert code == 2


def test_mc_check(capsys):
    argv = ["mc", "-n", "5", "-m", "1", "--theta", "2", "--samples", "1000000", "--seed", "42", "--check", "--json"]
    code, out, _ = run(capsys, *argv)
    rec = json.loads(out)
    assert code == 0 and rec["check"] == "PASS" and rec["exact"] == "1/21"
    code2, out2, _ = run(capsys, *argv)
    assert json.loads(out2)["p_hat"] == rec["p_hat"]


def test_mc_hex_seed(capsys):
    _, a, _ = run(capsys, "mc", "-n", "2", "--theta", "1", "--samples", "1600", "--seed", "0x2a", "--json")
    _, b, _ = run(capsys, "mc", "-n", "2", "--theta", "1", "--samples", "1600", "--seed", "42", "--json")
    assert a == b


def test_mc_check_fail_exit1(capsys, monkeypatch):
    monkeypatch.setattr(exact, "rhs_general", lambda inst: Fraction(0))
    code, out, _ = run(capsys, "mc", "-n", "2", "--theta", "1", "--samples", "1600", "--check")
    assert code == 1 and "FAIL" in out


@pytest.mark.parametrize("argv", [["-n", "5", "-m", "1", "--theta", "0"], ["-n", "0", "--theta", "1"],
                                  ["-n", "2", "--theta", "1", "--samples", "1001"]])
def test_mc_bad_params(capsys, argv):
    code, _, _ = run(capsys, "mc", *argv)
    assert code == 2


def test_mc_threads_identical(capsys):
    base = ["mc", "-n", "3", "-m", "2", "--theta", "1/2", "--samples", "64000", "--json"]
    _, a, _ = run(capsys, *base, "--threads", "1")
    _, b, _ = run(capsys, *base)
    _, c, _ = run(capsys, *base, "--threads", "4")
    assert a == b == c


def test_scan_inline(capsys):
    code, out, _ = run(capsys, "scan", "-n", "0..5", "-m", "1..2", "--theta", "1", "--strategies", "naive")
    assert code == 0
    assert len(out.splitlines()) == 1 + 12


def test_scan_json(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    code, _, _ = run(capsys, "scan", "-n", "1,2", "-m", "1", "--theta", "1/2,2", "--format", "json",
                     "--out", str(out_path), "--mc-samples", "1600", "--chunks", "4")
    assert code == 0
    data = json.loads(out_path.read_text())
    assert len(data) == 4 and data[0]["mc"]["samples"] == 1600


def test_scan_grid_file(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"n": [1, 2], "m": [1, 2], "theta": ["1"], "strategies": ["naive", "symdp"],
                                "mc": {"samples": 800, "seed": 7, "chunks": 2}}))
    code, out, _ = run(capsys, "scan", "--grid-file", str(path))
    assert code == 0 and len(out.splitlines()) == 1 + 2 * 2 + 2 * 2


def test_scan_threads_identical(capsys):
    base = ["scan", "-n", "1,4", "-m", "1,2", "--theta", "1,3/2", "--mc-samples", "4000", "--chunks", "4"]
    _, a, _ = run(capsys, *base, "--threads", "1")
    _, b, _ = run(capsys, *base)
    assert a == b


def test_scan_pole(capsys):
    code, _, err = run(capsys, "scan", "-n", "1", "-m", "1", "--theta", "-1")
    assert code == 2 and "pole" in err


def test_scan_bad_grid(capsys, tmp_path):
    path = tmp_path / "g.json"
    path.write_text("{not json")
    code, _, _ = run(capsys, "scan", "--grid-file", str(path))
    assert code == 2


def test_scan_oracle_mismatch_exit3(capsys, monkeypatch):
    monkeypatch.setattr(exact, "lhs_alternating_sum", lambda inst: Fraction(5))
    code, _, _ = run(capsys, "scan", "-n", "1", "-m", "1", "--theta", "1")
    assert code == 3


def test_selftest_fast(capsys):
    code, out, _ = run(capsys, "selftest", "--fast")
    assert code == 0
    assert out.count("PASS") >= 6 and "FAIL" not in out


def test_selftest_detects_corruption(capsys, monkeypatch):
    real = exact.rhs_general
    monkeypatch.setattr(exact, "rhs_general", lambda inst: real(inst) + (inst.n == 9))
    code, out, err = run(capsys, "selftest", "--fast")
    assert code != 0
    assert "FAIL identity-grid" in out


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "-n", "20", "--theta", "1", "--repeat", "3")
    assert code == 0 and "ProductForm" in out
