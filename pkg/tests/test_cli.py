import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from mcqw import harness as H
from mcqw.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = text.splitlines()
    return lines[0], [[float(v) for v in ln.split(",")] for ln in lines[1:]]


def test_dist_case_b_is_binomial(capsys):
    code, out, _ = run(capsys, "dist", "--M", "3", "--t", "3", "--init", "caseB")
    assert code == 0
    header, rows = csv_rows(out)
    assert header == "x,probability"
    assert len(rows) == 4
    for x, p in rows:
        j = (3 - x) / 2
        assert p == pytest.approx(stats.binom.pmf(j, 3, 0.5), abs=1e-12)


def test_dist_single_coin_hand_values(capsys):
    code, out, _ = run(capsys, "dist", "--M", "1", "--t", "2", "--init", "caseA")
    assert code == 0
    _, rows = csv_rows(out)
    assert [r[0] for r in rows] == [-2, 0, 2]
    assert np.allclose([r[1] for r in rows], [0.25, 0.5, 0.25], atol=1e-12)


def test_dist_json(capsys):
    code, out, _ = run(capsys, "dist", "--M", "2", "--t", "3", "--init", "caseA", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"meta", "data"}
    assert {"t", "M", "mass"} <= set(doc["data"])
    assert sum(doc["data"]["mass"]) == pytest.approx(1.0, abs=1e-12)
    assert doc["meta"]["seed"] == 0 and "numpy" in doc["meta"]["versions"]


def test_dist_mix_echoes_realized_counts(capsys):
    code, out, _ = run(capsys, "dist", "--M", "10", "--t", "12", "--init", "mix:beta=0.5", "--format", "json")
    assert code == 0
    assert json.loads(out)["meta"]["realized"] == {"n_pure": 3, "n_mixed": 7}


def test_dist_init_file(capsys, tmp_path):
    f = tmp_path / "coins.json"
    s = 1 / math.sqrt(2)
    f.write_text(json.dumps([[[s, 0], [0, s]], "mixed"]))
    code, out, _ = run(capsys, "dist", "--M", "2", "--t", "4", "--init", f"file={f}")
    assert code == 0
    _, rows = csv_rows(out)
    assert sum(p for _, p in rows) == pytest.approx(1.0, abs=1e-12)
    f.write_text(json.dumps(["mixed"]))
    assert run(capsys, "dist", "--M", "2", "--t", "4", "--init", f"file={f}")[0] == 2


def test_csv_round_trip_precision(capsys):
    _, out, _ = run(capsys, "dist", "--M", "3", "--t", "7", "--init", "ket1")
    for line in out.splitlines()[1:]:
        v = line.split(",")[1]
        assert repr(float(v)) == v


@pytest.mark.parametrize(
    "argv",
    [
        ["dist", "--M", "0", "--t", "3"],
        ["dist", "--M", "2", "--t", "3", "--init", "bogus"],
        ["dist", "--M", "2", "--t", "3", "--init", "mix:beta=2"],
        ["dist", "--M", "2", "--t", "3", "--frobnicate"],
        ["law", "nosuchlaw", "--moment", "2"],
        ["law", "konno"],
        ["law", "konno", "--moment", "9"],
        ["law", "fixedD:A:d=3", "--density", "0.1"],
        ["verify", "nosuchsuite"],
        ["sweep", "--assumption", "b", "--betas", "0.5,x"],
        ["sweep", "--assumption", "q", "--betas", "0.5"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_budget_exit(capsys):
    assert run(capsys, "dist", "--M", "4", "--t", "400", "--budget", "10")[0] == 3
    assert run(capsys, "sweep", "--assumption", "b", "--betas", "0.5", "--tmax", "500", "--budget", "1e5")[0] == 3


def test_law_examples(capsys):
    code, out, _ = run(capsys, "law", "konno", "--moment", "2")
    assert code == 0
    assert json.loads(out)["data"]["value"] == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-8)
    code, out, _ = run(capsys, "law", "arcsine:beta=1", "--density", "0")
    assert code == 0
    _, rows = csv_rows(out)
    assert rows[0][1] == pytest.approx(2 / math.pi, rel=1e-12)
    code, out, _ = run(capsys, "law", "product-ket1", "--moment", "2")
    assert json.loads(out)["data"]["value"] == pytest.approx(1 - 5 / (4 * math.sqrt(2)), abs=1e-8)


def test_law_grid_and_sample(capsys):
    code, out, _ = run(capsys, "law", "gaussian", "--cdf", "--grid=-1,1,5")
    assert code == 0
    header, rows = csv_rows(out)
    assert header == "x,value" and len(rows) == 5
    assert rows[2][1] == pytest.approx(0.5)
    a = run(capsys, "law", "konno", "--sample", "50", "--seed", "7")[1]
    b = run(capsys, "law", "konno", "--sample", "50", "--seed", "7")[1]
    c = run(capsys, "law", "konno", "--sample", "50", "--seed", "8")[1]
    assert a == b != c


def test_out_is_atomic_and_complete(capsys, tmp_path):
    target = tmp_path / "d.csv"
    target.write_text("old")
    code, out, _ = run(capsys, "dist", "--M", "2", "--t", "5", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("x,probability\n")
    assert os.listdir(tmp_path) == ["d.csv"]


def test_verify_lemmas(capsys):
    code, out, _ = run(capsys, "verify", "lemmas")
    assert code == 0
    doc = json.loads(out)
    assert doc["data"]["passed"] and all(c["passed"] for c in doc["data"]["checks"])


def test_verify_theorem_c_half(capsys):
    code, out, _ = run(capsys, "verify", "theorem:c", "--beta", "0.5")
    assert code == 0
    checks = {c["name"]: c for c in json.loads(out)["data"]["checks"]}
    fit = checks["c_beta0.5_exponent"]
    assert fit["value"] == pytest.approx(0.75, abs=0.05)
    assert checks["c_beta0.5_ks_monotone"]["passed"]


def test_sweep_rows_and_determinism(capsys, tmp_path):
    argv = ["sweep", "--assumption", "b", "--betas", "0.2,0.5,0.8", "--tmax", "2000"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(H.ConvergenceReport.CSV_FIELDS)
    n = sum(len(H.ScalingFamily.build("b", b, t_max=2000).points) for b in (0.2, 0.5, 0.8))
    assert len(lines) - 1 == n
    assert run(capsys, *argv)[1] == out
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, *argv, "--out", str(a), "--jobs", "2")
    run(capsys, *argv, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_sweep_ballistic_law(capsys):
    code, out, _ = run(capsys, "sweep", "--assumption", "a", "--betas", "1.0", "--tmax", "2000", "--format", "json")
    assert code == 0
    (rep,) = json.loads(out)["data"]["reports"]
    assert rep["law"] == "arcsine:beta=1.0"
    assert rep["theta"] == 1.0


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "mcqw.cli", "law", "konno", "--moment", "0"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert json.loads(r.stdout)["data"]["value"] == pytest.approx(1.0)
