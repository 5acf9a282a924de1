import subprocess
import sys

import pytest

from snfilter.cli import main, table_rows
from snfilter.pipeline import compute_R


def run(capsys, *argv):
    code = main(["-q", *argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_levels(capsys):
    assert run(capsys, "levels", "--n", "10") == (0, "9496\n", "")
    assert run(capsys, "levels", "--n", "5", "--nonempty")[1] == "25\n"
    assert run(capsys, "levels", "--n", "16")[1] == "46206736\n"
    code, out, _ = run(capsys, "levels", "--n", "3", "--list")
    assert out.split("\n")[:2] == [".", "1-2"]


def test_pipeline_and_stats(capsys, tmp_path):
    out_path = tmp_path / "r73.sn"
    code, out, _ = run(capsys, "pipeline", "--n", "7", "--depth", "3", "--out", str(out_path))
    assert code == 0 and out == "count: 52\n"
    code, out, _ = run(capsys, "stats", "--in", str(out_path))
    assert code == 0 and "count: 52" in out.splitlines()


def test_omega_zero_matches_full(capsys, tmp_path):
    a, b = tmp_path / "a.sn", tmp_path / "b.sn"
    run(capsys, "pipeline", "--n", "5", "--depth", "2", "--omega", "0", "--out", str(a))
    run(capsys, "pipeline", "--n", "5", "--depth", "2", "--out", str(b))
    assert "count: 4" in run(capsys, "stats", "--in", str(a))[1]
    assert "count: 4" in run(capsys, "stats", "--in", str(b))[1]


def test_bare_omega_uses_default(capsys, tmp_path):
    p = tmp_path / "w.sn"
    run(capsys, "pipeline", "--n", "6", "--depth", "2", "--omega", "--out", str(p))
    assert "universe: omega:2" in run(capsys, "stats", "--in", str(p))[1]


def test_reduce_roundtrip(capsys, tmp_path):
    from snfilter.levels import all_levels
    from snfilter.pipeline import extend
    from snfilter.serialize import save_dataset

    cands = extend(compute_R(6, 1), all_levels(6))
    src, dst = tmp_path / "c.sn", tmp_path / "r.sn"
    save_dataset(src, cands)
    code, out, _ = run(capsys, "reduce", "--in", str(src), "--out", str(dst), "--threads", "2")
    assert code == 0 and out == "count: 5\n"


def test_verify_exit_codes(capsys, tmp_path):
    p = tmp_path / "r52.sn"
    run(capsys, "pipeline", "--n", "5", "--depth", "2", "--out", str(p))
    code, out, _ = run(capsys, "verify", "--in", str(p), "--target-depth", "5", "--expect", "exists")
    assert code == 0 and "verdict: exists" in out and "witness:" in out
    code, out, _ = run(capsys, "verify", "--in", str(p), "--target-depth", "4", "--expect", "exists")
    assert code == 1 and "verdict: not-exists" in out
    code, _, _ = run(capsys, "verify", "--in", str(p), "--target-depth", "4", "--expect", "not-exists")
    assert code == 0


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "pipeline", "--n", "1", "--depth", "2", "--out", "x")[0] == 64
    assert run(capsys, "pipeline", "--n", "5", "--depth", "4", "--out", "x")[0] == 64
    assert run(capsys, "bogus")[0] == 64
    assert run(capsys, "levels", "--n", "5", "--frobnicate")[0] == 64
    assert run(capsys, "stats", "--in", str(tmp_path / "missing.sn"))[0] == 64
    bad = tmp_path / "bad.sn"
    bad.write_text("SNDS v1 n=3 d=1 universe=full count=1\nN 1-2\nS 001,000\n")
    code, _, err = run(capsys, "stats", "--in", str(bad))
    assert code == 64 and "line 3" in err
    assert run(capsys, "pipeline", "--n", "5", "--depth", "2", "--omega", "9", "--out", "x")[0] == 64


def test_guard_refusal(capsys, tmp_path):
    code, _, err = run(capsys, "pipeline", "--n", "8", "--depth", "3", "--memory-cap", "1k",
                       "--out", str(tmp_path / "x.sn"))
    assert code == 2 and "refused" in err


def test_memory_cap_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SNFILTER_MEMORY_CAP", "1k")
    assert run(capsys, "pipeline", "--n", "8", "--depth", "3", "--out", str(tmp_path / "x.sn"))[0] == 2
    # the flag wins over the environment
    assert run(capsys, "pipeline", "--n", "6", "--depth", "3", "--memory-cap", "1GiB",
               "--out", str(tmp_path / "y.sn"))[0] == 0


def test_table(capsys):
    code, out, _ = run(capsys, "table", "--n-range", "5..7", "--tsv", "--depth3-max", "7",
                       "--omega-depth3-max", "6")
    lines = out.strip().split("\n")
    assert code == 0 and len(lines) == 4
    header = lines[0].split("\t")
    assert header[:4] == ["n", "|G_n|", "|R_{n,1}|", "|R_{n,2}|"]
    rows = {int(r.split("\t")[0]): dict(zip(header, r.split("\t"))) for r in lines[1:]}
    assert rows[7]["|R_{n,3}|"] == "52"
    assert rows[7]["|R_{n,3}^ω|"] == "-"
    assert rows[6]["|G_n|"] == "76"
    assert rows[5]["⌊|R_{n,2}|·|G_n|/|R_{n,3}|⌋"] == "26.00"


def test_table_matches_single_runs():
    rows = table_rows(range(6, 8), depth3_max=7, omega_depth3_max=0)
    assert rows[0][3] == str(len(compute_R(6, 2)))
    assert rows[1][6] == str(len(compute_R(7, 3)))


def test_progress_on_stderr(capsys, tmp_path):
    code = main(["pipeline", "--n", "5", "--depth", "2", "--out", str(tmp_path / "p.sn")])
    _, err = capsys.readouterr()
    assert code == 0 and "R(5,2)" in err


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "snfilter.cli", "-q", "levels", "--n", "8"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "764\n"


@pytest.mark.parametrize("backend", ["python"])
def test_backend_flag(capsys, tmp_path, backend):
    code, out, _ = run(capsys, "--backend", backend, "pipeline", "--n", "6", "--depth", "2",
                       "--out", str(tmp_path / "b.sn"))
    assert code == 0 and out == "count: 5\n"
