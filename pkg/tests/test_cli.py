import csv
import io
import subprocess
import sys

import pytest

from primesum.cli import fmt, run
from primesum.prime_engine import load_store


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(out):
    return list(csv.reader(io.StringIO("".join(l + "\n" for l in out.splitlines() if not l.startswith("#")))))


def test_sum_single(capsys):
    code, out, _ = invoke(capsys, "sum", "--n", "10")
    assert code == 0
    assert out == "n,p_n,S_n\n10,29,129\n"


def test_sum_and_primes_ranges(capsys):
    code, out, _ = invoke(capsys, "sum", "--from", "1", "--to", "3")
    assert out == "n,p_n,S_n\n1,2,2\n2,3,5\n3,5,10\n"
    code, out, _ = invoke(capsys, "primes", "--to", "5")
    assert code == 0
    assert parse(out) == [["n", "p_n"], ["1", "2"], ["2", "3"], ["3", "5"], ["4", "7"], ["5", "11"]]


def test_scan_refined_reports_835(capsys):
    code, out, err = invoke(capsys, "scan", "--kind", "mandl-refined", "--to", "100000")
    assert code == 0
    assert "threshold 835" in err and "largest 834" in err
    rows = parse(out)
    assert rows[0] == ["n", "holds", "margin"]
    ns = [int(r[0]) for r in rows[1:]]
    assert ns == sorted(ns) and ns[-1] == 834
    assert all(r[1] == "false" for r in rows[1:])


def test_scan_refined_printed_form_exits_1(capsys):
    code, _, err = invoke(capsys, "scan", "--kind", "mandl-refined", "--to", "2000", "--refined-form", "ln2")
    assert code == 1
    assert "claimed range" in err


def test_scan_mandl_all_rows(capsys):
    code, out, err = invoke(capsys, "scan", "--kind", "mandl", "--to", "12", "--all")
    assert code == 0
    rows = parse(out)[1:]
    assert [r[0] for r in rows] == [str(n) for n in range(1, 13)]
    assert [int(r[0]) for r in rows if r[1] == "false"] == [1, 2, 3, 4, 5, 6, 8]
    assert rows[7] == ["8", "false", "-2"]


def test_scan_hassani_and_robin(capsys):
    code, out, err = invoke(capsys, "scan", "--kind", "hassani", "--from", "2", "--to", "10000")
    assert code == 0 and "threshold 10" in err
    code, out, err = invoke(capsys, "scan", "--kind", "robin", "--to", "100000")
    assert code == 0 and "threshold 35" in err


def test_verify(capsys):
    code, out, err = invoke(capsys, "verify", "--kind", "hassani", "--n", "9")
    assert code == 1
    assert parse(out) == [["n", "kind", "holds", "margin", "guarded"], ["9", "hassani", "false", "-64", "false"]]
    code, out, _ = invoke(capsys, "verify", "--kind", "robin", "--n", "100")
    assert code == 0
    assert parse(out)[1][:3] == ["100", "robin", "true"]


@pytest.mark.parametrize(
    "argv",
    [
        ["sum"],
        ["sum", "--n", "0"],
        ["sum", "--n", "3", "--to", "4"],
        ["sum", "--from", "9", "--to", "3"],
        ["approx", "--n", "2"],
        ["verify", "--kind", "robin", "--n", "3"],
        ["verify", "--kind", "goldbach", "--n", "30"],
        ["scan", "--kind", "robin", "--from", "2", "--to", "50"],
        ["residuals", "--grid-min", "5"],
        ["residuals", "--points", "2"],
        ["lemma31", "--grid-min", "1000"],
        ["quadcheck", "--tol", "0"],
        ["approx", "--n", "10", "--order", "3"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors_emit_no_data(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err


def test_memory_budget_is_usage_error(capsys):
    code, out, err = invoke(capsys, "sum", "--n", "5000", "--max-primes", "1000")
    assert code == 2 and out == "" and "max-primes" in err


def test_output_is_deterministic_and_meta_is_commented(capsys):
    argv = ["residuals", "--grid-min", "10000", "--grid-max", "100000", "--points", "4"]
    _, first, _ = invoke(capsys, *argv)
    _, second, _ = invoke(capsys, *argv)
    assert first == second
    _, with_meta, _ = invoke(capsys, *argv, "--meta")
    meta = [l for l in with_meta.splitlines() if l.startswith("#")]
    assert len(meta) == 2
    assert "\n".join(l for l in with_meta.splitlines() if not l.startswith("#")) + "\n" == first
    rows = parse(first)
    assert rows[0] == ["n", "exact", "approx", "abs_err", "scaled_err"]
    assert [int(r[0]) for r in rows[1:]] == [10000, 21544, 46416, 100000]


def test_reals_round_trip():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x
    assert fmt(12345678901234567890) == "12345678901234567890"
    assert fmt(True) == "true"


def test_out_and_cache(tmp_path, capsys):
    out_path = tmp_path / "sums.csv"
    cache = tmp_path / "primes.bin"
    code, out, _ = invoke(capsys, "sum", "--n", "100", "--out", str(out_path), "--cache", str(cache))
    assert code == 0 and out == ""
    assert out_path.read_text() == "n,p_n,S_n\n100,541,24133\n"
    assert load_store(cache).count == 100
    # cache is reused when large enough, rebuilt when not
    code, out, err = invoke(capsys, "sum", "--n", "50", "--cache", str(cache), "--progress")
    assert out.endswith("50,229,5117\n") and "loaded 100 primes" in err
    code, out, _ = invoke(capsys, "sum", "--n", "200", "--cache", str(cache))
    assert load_store(cache).count == 200


def test_approx(capsys):
    code, out, _ = invoke(capsys, "approx", "--n", "1000000", "--order", "2")
    rows = parse(out)
    assert rows[0] == ["n", "order", "p_n", "cipolla_p", "S_n", "sum_expansion"]
    n, order, p, cp, s, se = rows[1]
    assert (n, order, p, s) == ("1000000", "2", "15485863", "7472966967499")
    assert abs(float(cp) - 15485863) / 15485863 < 5e-4


def test_residuals_target_and_verdict(capsys):
    code, out, err = invoke(
        capsys, "residuals", "--target", "robin_gap", "--grid-min", "10000", "--grid-max", "1000000", "--points", "5"
    )
    assert code == 0
    assert "robin_gap:" in err and "slope" in err
    assert len(parse(out)) == 6


def test_lemma31(capsys):
    code, out, err = invoke(capsys, "lemma31", "--grid-max", "1000000", "--points", "5", "--coefficient", "paper")
    assert code == 0
    assert parse(out)[0] == ["n", "c_hat", "scaled_err"]
    assert "nearer candidate: derived (-5)" in err


def test_quadcheck(capsys):
    code, out, err = invoke(capsys, "quadcheck", "--term", "x")
    assert code == 0
    rows = parse(out)
    assert rows[0] == ["term", "n", "numeric", "closed_form", "scaled_residual"]
    assert [r[1] for r in rows[1:]] == ["1000", "10000", "100000", "1000000"]
    assert all(abs(float(r[4]) + 4.5) < 1e-6 for r in rows[1:])
    code, out, err = invoke(capsys, "quadcheck")
    assert code == 0 and len(parse(out)) == 1 + 8 * 4


def test_report(capsys):
    code, out, err = invoke(capsys, "report", "--to", "100000")
    assert code == 0
    rows = {r[0]: r for r in parse(out)[1:]}
    assert rows["hassani_threshold"][1:] == ["10", "10", "pass"]
    assert rows["mandl-refined_threshold"][1:] == ["835", "835", "pass"]
    assert rows["robin_threshold"][1] == "35"


def test_report_flags_printed_refined_form(capsys):
    code, out, _ = invoke(capsys, "report", "--to", "100000", "--refined-form", "ln2")
    assert code == 1
    rows = {r[0]: r for r in parse(out)[1:]}
    assert rows["mandl-refined_threshold"][3] == "fail"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "primesum", "sum", "--n", "10"], capture_output=True, text=True, check=True
    )
    assert proc.stdout == "n,p_n,S_n\n10,29,129\n"


def test_report_lower_limit(capsys):
    code, out, err = invoke(capsys, "report", "--to", "10000")
    assert code == 2 and out == ""
