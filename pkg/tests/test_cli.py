import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from ceresa import hypergeom
from ceresa.cache import ResultCache
from ceresa.cli import main
from ceresa.rows import parse_csv
from ceresa.volume import clear_caches


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_seven(capsys, cache_dir):
    code, out, _ = run(capsys, "compute", "--n", "7", "--k", "1")
    assert code == 0
    [row] = parse_csv(out)
    assert row.N == 7 and row.m == 2 and row.verdict == "NonIntegerProven"
    assert abs(float(row.value) - 0.64692) <= 5e-6
    assert row.err_exponent <= -10


def test_compute_json(capsys, cache_dir):
    code, out, _ = run(capsys, "compute", "--n", "13", "--k", "5", "--json")
    assert code == 0
    rec = json.loads(out)
    assert rec["k"] == 5 and rec["verdict"] == "NonIntegerProven"
    assert set(rec) == {"N", "m", "k", "value", "err_exponent", "verdict", "prec_bits", "method", "elapsed_ms"}


@pytest.mark.parametrize("argv,needle", [
    (["compute", "--n", "5", "--k", "1"], "WrongResidueClass"),
    (["compute", "--n", "91"], "NotPrime"),
    (["compute", "--n", "13", "--k", "6"], "KOutOfRange"),
    (["periods", "--n", "7", "--a", "0", "--b", "2", "--i", "0", "--j", "0"], "IndexSetError"),
])
def test_input_errors_exit_one(capsys, cache_dir, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 1 and needle in err


def test_usage_error_exit_one(capsys):
    with pytest.raises(SystemExit) as info:
        main(["compute", "--n", "seven"])
    assert info.value.code == 1


def test_inconclusive_exit_three(capsys, cache_dir):
    code, out, _ = run(capsys, "compute", "--n", "13", "--k", "5", "--prec-bits", "40")
    assert code == 3
    assert parse_csv(out)[0].verdict == "Inconclusive"


def test_inconsistency_exit_two(capsys, cache_dir, monkeypatch):
    clear_caches()
    broken = lambda params, prec: hypergeom.f32_unit_series(params, prec) + F(1, 10**6)
    monkeypatch.setattr(hypergeom, "f32_unit_quadrature", broken)
    code, _, err = run(capsys, "compute", "--n", "7", "--no-cache")
    clear_caches()
    assert code == 2 and "InconsistencyError" in err


def test_periods(capsys):
    code, out, _ = run(capsys, "periods", "--n", "7", "--a", "1", "--b", "2", "--i", "0", "--j", "0")
    assert code == 0
    # (1 - z)(1 - z^2) = 1 - z - z^2 + z^3
    assert out.splitlines()[0] == "coeffs: 1 -1 -1 1 0 0"
    code, out, _ = run(capsys, "periods", "--n", "7", "--a", "1", "--b", "2", "--i", "1", "--j", "1", "--json")
    rec = json.loads(out)
    assert rec["coeffs"] == [-1, -1, -1, 0, -2, -2]


def test_sweep_resumes_from_cache(capsys, cache_dir, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    code, _, err = run(capsys, "sweep", "--max-n", "20", "--k", "1", "--jobs", "1", "--out", str(out1))
    assert code == 0 and "proven=3" in err
    rows = parse_csv(out1.read_text())
    assert [r.N for r in rows] == [7, 13, 19]
    lines_before = ResultCache(cache_dir).stats().lines
    clear_caches()
    code, _, _ = run(capsys, "sweep", "--max-n", "20", "--k", "1", "--jobs", "2", "--out", str(out2))
    assert code == 0
    assert ResultCache(cache_dir).stats().lines == lines_before
    assert out1.read_bytes() == out2.read_bytes()


def test_parallel_matches_serial_without_cache(capsys, tmp_path):
    outs = []
    for jobs in ("1", "3"):
        clear_caches()
        out = tmp_path / f"j{jobs}.csv"
        code, _, _ = run(capsys, "sweep", "--max-n", "40", "--k", "2", "--jobs", jobs, "--no-cache",
                         "--no-timing", "--out", str(out))
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert [r.N for r in parse_csv(outs[0].decode())] == [7, 13, 19, 31, 37]


def test_sweep_k_skips_small_N(capsys, cache_dir, tmp_path):
    out = tmp_path / "k3.csv"
    code, _, _ = run(capsys, "sweep", "--max-n", "13", "--k", "3", "--out", str(out), "--jobs", "1")
    assert code == 0
    assert [r.N for r in parse_csv(out.read_text())] == [13]


def test_verify_rows(capsys, cache_dir):
    code, out, _ = run(capsys, "verify", "--row", "7", "--row", "13", "--jobs", "1")
    assert code == 0
    assert "2/2 rows pass" in out


def test_verify_corrupted_golden(capsys, cache_dir, tmp_path):
    golden = tmp_path / "golden.csv"
    golden.write_text("N,m,f\n7,2,0.64692\n13,3,0.31390\n19,7,0.25972\n")
    code, out, _ = run(capsys, "verify", "--golden", str(golden), "--jobs", "1")
    assert code == 4
    assert "1/3 rows pass" in out
    assert "mismatched rows: 13, 19" in out
    assert "printed-reading" in out


def test_verify_unknown_row(capsys, cache_dir):
    code, _, err = run(capsys, "verify", "--row", "11")
    assert code == 1


def test_cache_commands(capsys, tmp_path, monkeypatch):
    flag_dir, env_dir = tmp_path / "flag", tmp_path / "env"
    monkeypatch.setenv("CERESA_CACHE_DIR", str(env_dir))
    assert run(capsys, "cache", "path")[1].strip() == str(env_dir / "results.jsonl")
    assert run(capsys, "cache", "path", "--cache-dir", str(flag_dir))[1].strip() == str(flag_dir / "results.jsonl")
    run(capsys, "compute", "--n", "7")
    code, out, _ = run(capsys, "cache", "stats", "--json")
    assert code == 0 and json.loads(out)["entries"] == 1
    assert "removed 1" in run(capsys, "cache", "clear")[1]
    assert json.loads(run(capsys, "cache", "stats", "--json")[1])["entries"] == 0


def test_module_entry_point(cache_dir):
    proc = subprocess.run([sys.executable, "-m", "ceresa", "periods", "--n", "13", "--a", "1", "--b", "3",
                           "--i", "2", "--j", "0"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("coeffs:")
