from __future__ import annotations

import subprocess
import sys

import pytest

from diagcalc.basis import reduce
from diagcalc.bch import bch_trees
from diagcalc.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from diagcalc.grammar import parse_sum

H_XY = "D[leg(x)-v1.0; leg(y)-v1.1; leg(x)-v2.0; v1.2-v2.1; leg(y)-v2.2]"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    cov = tmp_path / "cov.txt"
    cov.write_text("x,y\n2 1\n1 1\n")
    series = tmp_path / "series.txt"
    series.write_text("1\tempty\n1\t%s\n" % H_XY)
    return tmp_path, str(cov), str(series)


def test_bch_degree_two_prints_the_trees(capsys):
    code, out, _ = run(capsys, "bch", "--degree", "2")
    assert code == EXIT_OK
    assert out == ("D[leg(z)-leg(dx)] + D[leg(z)-leg(dy)]"
                   " + 1/2*D[leg(z)-v1.0; leg(dx)-v1.1; leg(dy)-v1.2]\n")
    assert reduce(parse_sum(out.strip())) == bch_trees(2)


def test_bch_degree_out_of_range(capsys):
    code, _, err = run(capsys, "bch", "--degree", "99")
    assert code == EXIT_INPUT
    assert "--degree" in err


def test_coords_format(capsys):
    code, out, _ = run(capsys, "--format", "coords", "bch", "--degree", "2")
    assert code == EXIT_OK
    assert "grade 1 [z,dx,dy]: (1/2)" in out.splitlines()


def test_check_passes_and_is_reproducible(capsys):
    code, first, _ = run(capsys, "check", "fubini", "--max-degree", "2", "--seed", "1")
    assert code == EXIT_OK
    assert first.rstrip().endswith("fubini: PASS (20/20 passed)")
    _, again, _ = run(capsys, "check", "fubini", "--max-degree", "2", "--seed", "1")
    assert again == first


def test_check_runs_with_other_seeds(capsys):
    _, a, _ = run(capsys, "check", "ibp", "--seed", "1", "--cases", "3")
    _, b, _ = run(capsys, "check", "ibp", "--seed", "2", "--cases", "3")
    assert "PASS" in a and "PASS" in b


def test_check_failure_exit_code(capsys, monkeypatch):
    from diagcalc import checks

    def broken(seed, max_degree=2, cases=20):
        rep = checks.Report("fubini")
        rep.cases = 1
        rep.fail("case 0", "forced")
        return rep

    monkeypatch.setitem(checks.RUNNERS, "fubini", broken)
    code, out, _ = run(capsys, "check", "fubini")
    assert code == EXIT_FAIL
    assert "FAIL" in out


def test_unknown_suite_is_input_error(capsys):
    code, _, _ = run(capsys, "check", "nope")
    assert code == EXIT_INPUT


def test_integrate_all_variables(capsys, files):
    _, cov, series = files
    code, out, _ = run(capsys, "integrate", "--covariance", cov, "--series", series)
    assert code == EXIT_OK
    assert out == "empty - D[v1.0-v2.0; v1.1-v2.1; v1.2-v2.2]\n"


def test_integrate_partial_prints_gaussian(capsys, files):
    _, cov, series = files
    code, out, _ = run(capsys, "integrate", "--covariance", cov, "--series", series,
                       "--vars", "x")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[:4] == ["# covariance", "y", "1/2", "# series"]
    assert lines[4] == "1\tempty"


def test_malformed_covariance_reports_position(capsys, files):
    tmp, _, series = files
    bad = tmp / "bad.txt"
    bad.write_text("x,y\n2 1\n1\n")
    code, _, err = run(capsys, "integrate", "--covariance", str(bad), "--series", series)
    assert code == EXIT_INPUT
    assert "line 3, column 1" in err


def test_malformed_series_reports_position(capsys, files):
    tmp, cov, _ = files
    bad = tmp / "bad.txt"
    bad.write_text("1\tempty\n1\tD[leg(x)-v1.3]\n")
    code, _, err = run(capsys, "integrate", "--covariance", cov, "--series", str(bad))
    assert code == EXIT_INPUT
    assert "line 2" in err and "column" in err


def test_singular_covariance_is_degenerate(capsys, files):
    tmp, _, series = files
    sing = tmp / "sing.txt"
    sing.write_text("x,y\n1 1\n1 1\n")
    code, _, err = run(capsys, "integrate", "--covariance", str(sing), "--series", series)
    assert code == EXIT_INPUT
    assert "degenerate" in err


def test_unknown_variable(capsys, files):
    _, cov, series = files
    code, _, err = run(capsys, "integrate", "--covariance", cov, "--series", series,
                       "--vars", "q")
    assert code == EXIT_INPUT
    assert "q" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "reduce", "--file", str(tmp_path / "none.txt"))
    assert code == EXIT_INPUT
    assert "none.txt" in err


def test_reduce_expression(capsys):
    code, out, _ = run(capsys, "reduce", "D[leg(x)-leg(y)] + D[leg(y)-leg(x)]")
    assert code == EXIT_OK
    assert out == "2*D[leg(x)-leg(y)]\n"


def test_reduce_as_zero(capsys):
    code, out, _ = run(capsys, "reduce", "D[leg(x)-v1.0; leg(x)-v1.1; leg(y)-v1.2]")
    assert code == EXIT_OK
    assert out == "0\n"


def test_reduce_parse_error(capsys):
    code, _, err = run(capsys, "reduce", "D[leg(x)-v1.3]")
    assert code == EXIT_INPUT
    assert "line 1, column 10" in err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "diagcalc.cli", "bch", "--degree", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout == "D[leg(z)-leg(dx)] + D[leg(z)-leg(dy)]\n"
