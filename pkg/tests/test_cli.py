import csv
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from mfsb.cli import EXIT_CAP, EXIT_FAIL, EXIT_OK, EXIT_USAGE, default_threads, main
from mfsb.core import CHI, TWO_LOG_GAMMA


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_tree_small(capsys):
    code, out, _ = run(capsys, "tree", "--depth", "2")
    rows = list(csv.DictReader(out.splitlines()))
    assert code == EXIT_OK and len(rows) == 4
    ends = [(Fraction(int(r["left_num"]), int(r["left_den"])), Fraction(int(r["right_num"]), int(r["right_den"]))) for r in rows]
    F = Fraction
    assert ends == [(F(0), F(1, 3)), (F(1, 3), F(1, 2)), (F(1, 2), F(2, 3)), (F(2, 3), F(1))]


def test_tree_zero_json(capsys):
    code, out, _ = run(capsys, "tree", "--depth", "0", "--format", "json")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["rows"] == [
        {"order": 0, "index": 1, "left_num": 0, "left_den": 1, "right_num": 1, "right_den": 1, "length_num": 1, "length_den": 1}
    ]


def test_tree_vertices(capsys):
    code, out, _ = run(capsys, "tree", "--depth", "3", "--vertices")
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 9 and rows[4]["num"] == "1" and rows[4]["den"] == "2"


def test_tree_cap(capsys):
    code, _, err = run(capsys, "tree", "--depth", "40")
    assert code == EXIT_CAP and "cap" in err


@pytest.mark.slow
def test_tree_twenty_roundtrip(tmp_path, capsys):
    path = tmp_path / "t20.csv"
    assert main(["tree", "--depth", "20", "--out", str(path)]) == EXIT_OK
    with open(path) as fh:
        reader = csv.reader(fh)
        next(reader)
        dens = [int(r[7]) for r in reader]
    assert len(dens) == 2**20
    # exact sum by pairwise Fraction reduction
    terms = [Fraction(1, d) for d in dens]
    while len(terms) > 1:
        terms = [terms[i] + terms[i + 1] for i in range(0, len(terms), 2)]
    assert terms[0] == 1


def test_pressure_operator(capsys):
    code, out, _ = run(capsys, "pressure", "--method", "operator-eig", "--theta-min", "1", "--theta-max", "1", "--theta-steps", "1")
    rows = list(csv.DictReader(out.splitlines()))
    assert code == EXIT_OK and abs(float(rows[0]["value"])) < 1e-10


def test_pressure_reference_column(capsys):
    code, out, _ = run(
        capsys, "pressure", "--method", "direct-level", "--depth", "18", "--reference", "induced-root",
        "--theta-min", "-1", "--theta-max", "-1", "--theta-steps", "1",
    )
    row = next(csv.DictReader(out.splitlines()))
    assert code == EXIT_OK and abs(float(row["difference"])) <= 0.05


def test_pressure_induced_convex(capsys):
    code, out, _ = run(capsys, "pressure", "--method", "induced-root", "--format", "json")
    rows = json.loads(out)["rows"]
    vals = [r["value"] for r in rows]
    th = [r["theta"] for r in rows]
    slopes = [(vals[i + 1] - vals[i]) / (th[i + 1] - th[i]) for i in range(len(vals) - 1)]
    assert len(rows) == 111
    assert all(s <= 0 for s in slopes) and all(b >= a - 1e-9 for a, b in zip(slopes, slopes[1:]))


def test_pressure_domain_errors(capsys):
    code, _, err = run(capsys, "pressure", "--method", "operator-eig", "--theta-min", "0.3", "--theta-max", "1")
    assert code == EXIT_USAGE and "0.55" in err
    code, _, _ = run(capsys, "pressure", "--method", "nope")
    assert code == EXIT_USAGE
    code, _, _ = run(capsys, "pressure", "--theta-min", "1", "--theta-max", "0")
    assert code == EXIT_USAGE


def test_spectrum_gauss(capsys):
    code, out, _ = run(capsys, "spectrum", "gauss-tauD", "--alpha-steps", "60")
    rows = list(csv.DictReader(out.splitlines()))
    assert code == EXIT_OK and len(rows) == 60
    best = max(rows, key=lambda r: float(r["tau"]))
    nearest = min(rows, key=lambda r: abs(float(r["alpha"]) - CHI))
    assert best is nearest and abs(float(best["tau"]) - 1) <= 2e-3
    assert "violation" not in {r["segment"] for r in rows}


def test_spectrum_farey_endpoints(capsys):
    code, out, _ = run(capsys, "spectrum", "farey-tau", "--alpha-steps", "5", "--format", "json")
    pts = json.loads(out)["points"]
    assert code == EXIT_OK
    assert (pts[0]["alpha"], pts[0]["tau"]) == (0.0, 1.0)
    assert pts[-1]["alpha"] == pytest.approx(TWO_LOG_GAMMA) and pts[-1]["tau"] == 0.0


def test_spectrum_domain(capsys):
    code, _, _ = run(capsys, "spectrum", "farey-tau", "--alpha-min", "0", "--alpha-max", "1.5", "--alpha-steps", "3")
    assert code == EXIT_USAGE


def test_verify_selection(capsys):
    code, out, err = run(capsys, "verify", "lemma-2.1-bijection", "lemma-4.6-qbound", "zeta-sandwich", "--format", "json")
    rows = json.loads(out)
    assert code == EXIT_OK and [r["status"] for r in rows] == ["pass"] * 3
    assert "PASS lemma-4.6-qbound" in err


def test_verify_unknown_and_list(capsys):
    code, _, err = run(capsys, "verify", "bogus")
    assert code == EXIT_USAGE and "bogus" in err
    code, out, _ = run(capsys, "verify", "--list")
    assert code == EXIT_OK and "prop-4.5-7-sandwich" in out


def test_verify_failure_exit(monkeypatch, capsys):
    from mfsb import verify

    monkeypatch.setattr(verify, "qbound_holds", lambda q, tau, k: False)
    code, _, _ = run(capsys, "verify", "lemma-4.6-qbound", "--budget", "quick")
    assert code == EXIT_FAIL


def test_rates_golden(capsys):
    code, out, _ = run(capsys, "rates", "--cf", "1,1,1", "--repeat", "40")
    data = json.loads(out)
    assert code == EXIT_OK and data["truncated"]
    assert data["ell"]["l3"] == pytest.approx(TWO_LOG_GAMMA, abs=0.01)


def test_rates_rational(capsys):
    code, out, _ = run(capsys, "rates", "--rational", "2/5")
    data = json.loads(out)
    assert data["terminal"] and data["ell"]["l5"] == "terminal" and data["ell"]["l6"] == "terminal"


def test_rates_word_string(capsys):
    code, out, _ = run(capsys, "rates", "[2,2]")
    assert code == EXIT_OK and json.loads(out)["input"] == "[2, 2]"
    assert run(capsys, "rates", "[1,x]")[0] == EXIT_USAGE


def test_rates_montecarlo(capsys):
    args = ("rates", "--montecarlo", "--samples", "200", "--depth", "300", "--seed", "7", "--threads", "1")
    code, out, _ = run(capsys, *args)
    row = next(csv.DictReader(out.splitlines()))
    assert code == EXIT_OK and set(row) == {"seed", "samples", "depth", "mean", "stderr"}
    assert abs(float(row["mean"]) - CHI) < 3 * float(row["stderr"])
    assert run(capsys, *args)[1] == out


def test_rates_usage(capsys):
    assert run(capsys, "rates")[0] == EXIT_USAGE
    assert run(capsys, "rates", "--cf", "1,x")[0] == EXIT_USAGE
    assert run(capsys, "rates", "--rational", "0.4")[0] == EXIT_USAGE
    assert run(capsys, "rates", "--montecarlo")[0] == EXIT_USAGE
    assert run(capsys, "rates", "--rational", "2/5", "--depth", "5")[0] == EXIT_USAGE
    assert run(capsys, "bogus")[0] == EXIT_USAGE


def test_threads_env(monkeypatch):
    monkeypatch.setenv("MFSB_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.delenv("MFSB_THREADS")
    assert default_threads() >= 1
    monkeypatch.setenv("MFSB_THREADS", "zero")
    assert main(["tree", "--depth", "1"]) == EXIT_USAGE


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mfsb", "tree", "--depth", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.count("\n") == 3
