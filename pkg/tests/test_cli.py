import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ccnr import states as st
from ccnr.cli import main
from ccnr.criteria import default_grid


def body_rows(text):
    return list(csv.reader(line for line in text.splitlines() if not line.startswith("#")))[1:]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_bell_is_detected(capsys):
    code, out, _ = run(capsys, "eval", "--generator", "maxent", "--d", "2", "2")
    assert code == 2
    lines = out.splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "# ccnr-report v1"
    rows = {row[1]: row for row in body_rows(out)}
    assert set(rows) == {"ccnr", "enhanced", "family", "quadratic_F"}
    assert float(rows["enhanced"][6]) == pytest.approx(-1, abs=1e-12)
    assert rows["ccnr"][7] == "true"


def test_eval_maximally_mixed_is_clean(capsys):
    code, out, _ = run(capsys, "eval", "--generator", "maximally_mixed", "--d", "3", "3",
                       "--criterion", "ccnr")
    assert code == 0
    row = body_rows(out)[-1]
    assert float(row[4]) == pytest.approx(1 / 3, abs=1e-14)


def test_eval_rejects_malformed_state(tmp_path, capsys):
    path = tmp_path / "bad.json"
    m = np.diag([0.6, 0.6, 0.0, 0.0])
    path.write_text(json.dumps({"d_a": 2, "d_b": 2,
                                "matrix": [[[float(v), 0.0] for v in row] for row in m]}))
    code, out, err = run(capsys, "eval", "--state", str(path))
    assert code == 1
    assert "unit trace" in err
    assert out == ""


def test_eval_argument_errors_exit_one(capsys):
    assert run(capsys, "eval", "--generator", "haar")[0] == 1
    assert run(capsys, "eval")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--criterion", "bogus"])
    assert exc.value.code == 1


def test_eval_json_output_and_no_overwrite(tmp_path, capsys):
    out = tmp_path / "r.json"
    args = ["eval", "--generator", "haar", "--d", "2", "3", "--seed", "4", "--out", str(out)]
    run(capsys, *args)
    payload = json.loads(out.read_text())
    assert payload["version"] == "ccnr-report v1"
    assert payload["config"]["seed"] == 4
    assert len(payload["reports"]) == 4
    before = out.read_text()
    code, _, err = run(capsys, *args[:-2], "--seed", "5", "--out", str(out))
    assert code == 1 and "--force" in err
    assert out.read_text() == before
    assert run(capsys, *args[:-2], "--seed", "5", "--out", str(out), "--force")[0] in (0, 2)
    assert out.read_text() != before


def test_scan_output_and_summary(tmp_path, capsys):
    summary = tmp_path / "s.json"
    code, out, _ = run(capsys, "scan", "--generator", "isotropic", "--d", "2", "2",
                       "--p", "0.5", "--grid", "polar:100:4", "--summary", str(summary))
    assert code == 2
    assert len(body_rows(out)) == len(default_grid(r_max=100, n_theta=4))
    data = json.loads(summary.read_text())
    assert data[0]["violations"] > 0
    assert data[0]["min_margin"] < 0


def test_scan_explicit_grid_separable(capsys):
    code, out, _ = run(capsys, "scan", "--generator", "separable", "--d", "3", "3",
                       "--count", "3", "--grid", "0:0,1:1,100:100")
    assert code == 0
    assert len(body_rows(out)) == 9


def test_witness_json(tmp_path, capsys):
    out = tmp_path / "w.json"
    code, _, _ = run(capsys, "witness", "--generator", "haar", "--d", "2", "3",
                     "--rank", "1", "--seed", "3", "--out", str(out))
    payload = json.loads(out.read_text())
    ver = payload["verification"]
    assert ver["w_inf_expectation"] == pytest.approx(ver["enhanced_rhs_minus_lhs"], abs=1e-9)
    assert ver["w_inf_formula"] == pytest.approx(ver["tr2_formula"], abs=1e-10)
    assert payload["witness"]["basis_convention"] == "gellmann-v1"
    assert code == (2 if ver["w_inf_expectation"] < -1e-9 else 0)
    assert ver["status"] in ("detected", "undetected")


def test_witness_degenerate_marginal(capsys):
    code, out, err = run(capsys, "witness", "--generator", "haar", "--d", "2", "2",
                         "--rank", "1", "--seed", "0")
    # a pure global state of 2x2 has mixed marginals unless it is a product
    assert json.loads(out)["status"] == "ok"
    code, out, err = run(capsys, "witness", "--generator", "product", "--d", "2", "2")
    assert json.loads(out)["status"] == "ok"


def test_verify_deterministic_and_exit_codes(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["verify", "--family", "haar", "--d", "2", "3", "--count", "5", "--seed", "9"]
    assert run(capsys, *base, "--out", str(a))[0] == 0
    _, _, err = run(capsys, *base, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert "counterexamples=0" in err
    text = a.read_text()
    assert text.startswith("# ccnr-verify v1\n")
    assert "# tested: 5" in text
    assert run(capsys, "verify", "--family", "haar", "--count", "1")[0] == 1


def test_verify_ds_uses_ppt_sampler(capsys):
    code, out, _ = run(capsys, "verify", "--family", "ds", "--d", "3", "3", "--count", "5")
    assert code == 0
    assert "# detected_enhanced: 0" in out


def test_sample_round_trip(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert run(capsys, "sample", "--generator", "werner", "--d", "3", "3", "--p", "0.3",
               "--out", str(path))[0] == 0
    assert np.allclose(st.load_state(path).matrix, st.werner(3, 0.3).matrix, atol=0)
    code, out, _ = run(capsys, "eval", "--state", str(path), "--criterion", "enhanced")
    assert code in (0, 2)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ccnr", "eval", "--generator", "maxent",
                           "--d", "2", "2", "--criterion", "ccnr"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "ccnr-report v1" in proc.stdout
