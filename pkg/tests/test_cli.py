import csv
import io

import pytest

from swiptaf import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_eval_cdf(capsys):
    code, out, _ = run(capsys, "eval", "cdf", "--z", "5")
    assert code == 0
    row = table(out)[0]
    assert float(row["value"]) == pytest.approx(0.265550243986619, rel=1e-10)


def test_eval_cutoff_reports_residual(capsys):
    code, out, _ = run(capsys, "eval", "opra-cutoff")
    assert code == 0
    row = table(out)[0]
    assert float(row["value"]) == pytest.approx(0.850191023031, rel=1e-10)
    assert abs(float(row["residual"])) <= 1e-9


def test_eval_needs_threshold(capsys):
    code, _, err = run(capsys, "eval", "pdf")
    assert code == 1 and "--z" in err


def test_unknown_metric_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["eval", "bogus"])
    assert exc.value.code == 1


def test_bad_config_value(capsys):
    code, _, err = run(capsys, "eval", "ora", "--set", "system.C=-1")
    assert code == 1 and "C" in err


def test_numerical_failure_exit_code(capsys):
    code, _, err = run(capsys, "eval", "cifr", "--set", "nak.m1=1")
    assert code == 2 and "DivergentMomentError" in err


def test_sweep_columns_and_db_grid(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--param", "energy.ps_n1_db", "--start", "20",
                     "--stop", "40", "--points", "3", "--metric", "aser:QPSK,cdf:5",
                     "--out", str(out))
    assert code == 0
    rows = table(out.read_text())
    assert list(rows[0]) == ["energy.ps_n1_db", "aser:QPSK", "aser:QPSK_err", "cdf:5", "cdf:5_err"]
    aser_vals = [float(r["aser:QPSK"]) for r in rows]
    assert aser_vals == sorted(aser_vals, reverse=True)


def test_sweep_reports_point_failures(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, err = run(capsys, "sweep", "--param", "nak.m1", "--start", "1", "--stop", "2",
                       "--points", "2", "--metric", "cifr", "--out", str(out))
    assert code == 0
    rows = table(out.read_text())
    assert rows[0]["cifr"] == "" and rows[1]["cifr"] != ""
    assert (tmp_path / "sweep.csv.diag.txt").exists()
    assert "DivergentMomentError" in err


def test_simulate_single_point(capsys):
    code, out, _ = run(capsys, "simulate", "--draws", "20000", "--metric", "ora,cdf:5",
                       "--mode", "independent-approximation")
    assert code == 0
    row = table(out)[0]
    assert float(row["ora"]) == pytest.approx(3.043, rel=0.02)
    assert float(row["cdf:5_se"]) > 0


def test_simulate_reproducible_across_workers(capsys):
    args = ["simulate", "--draws", "20000", "--param", "energy.ps_n1_db", "--start", "30",
            "--stop", "40", "--points", "2", "--metric", "aser:BPSK,tcifr"]
    _, one, _ = run(capsys, *args, "--workers", "1")
    _, two, _ = run(capsys, *args, "--workers", "2")
    assert one == two


def test_validate_exit_code_on_failure(capsys, monkeypatch):
    rows = [("x", 1.0, 1.0, 1.0, 0.1, "PASS", ""), ("y", 1.0, 2.0, 1.0, 0.1, "FAIL", "")]
    monkeypatch.setattr(cli, "validation_report", lambda *a, **k: rows)
    code, out, err = run(capsys, "validate", "--draws", "10")
    assert code == 3 and "y" in err
    assert len(table(out)) == 2


def test_verdict_rules():
    assert cli._verdict(1.0, 1.0005, 1.0, 0.01, 10 ** 6) == ("PASS", "")
    assert cli._verdict(1.0, 1.01, 1.0, 0.01, 10 ** 6)[0] == "FAIL"
    assert cli._verdict(1.0, 1.0, 1.1, 0.01, 10 ** 6)[0] == "FAIL"
    assert cli._verdict(1.0, 1.0, 5.0, 0.01, 100) == ("PASS", "inconclusive-mc")


def test_specfun_eval(capsys):
    code, out, _ = run(capsys, "specfun", "eval", "m=1, n=0, upper=[], lower=[(0,1)], z=1")
    assert code == 0
    assert out.splitlines()[0] == "value 3.67879441171442e-01"


def test_specfun_eval_incomplete(capsys):
    code, out, _ = run(capsys, "specfun", "eval",
                       "m=1, n=1, upper=[(-1, 1, 0.5)], lower=[(0, 1)], z=1")
    assert code == 0
    # int_0.5^inf z e^-2z dz = e^-1 / 2
    assert float(out.split()[1]) == pytest.approx(0.18393972058572116, rel=1e-10)


def test_specfun_bad_description(capsys):
    code, _, err = run(capsys, "specfun", "eval", "m=1, lower=[(0,1)]")
    assert code == 1 and "missing" in err
