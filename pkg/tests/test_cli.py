import json
import subprocess
import sys

import pytest

from ccp import cli, verify

HEADER = "theorem,n,r,statistic,value,threshold,se,pass,seed,ms"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exact_commands(capsys):
    assert run_cli(capsys, "exact", "hyperharmonic", "--n", "3", "--r", "1")[1] == "11/6 ≈ 1.833333\n"
    assert run_cli(capsys, "exact", "oracle", "--n", "2", "--r", "1")[1] == "1:1/2 2:1/2\n"
    code, out, _ = run_cli(capsys, "exact", "et", "--n", "1000", "--r", "0")
    assert code == 0 and "asymptotic=7484.970944" in out and "exact=7485.470861" in out
    code, out, _ = run_cli(capsys, "exact", "pgf", "--n", "2", "--r", "1", "--u", "0.5")
    assert "G(0.5) = 0.375" in out
    code, out, _ = run_cli(capsys, "exact", "hyperharmonic", "--n", "2", "--r", "2", "--method", "alternating",
                           "--format", "json")
    assert json.loads(out)["exact"] == "7/4"


def test_guard_violation_exit_code(capsys):
    code, _, err = run_cli(capsys, "exact", "oracle", "--n", "9", "--r", "1")
    assert code == 2 and "n <= 6" in err
    code, _, err = run_cli(capsys, "exact", "hyperharmonic", "--n", "20000", "--r", "1")
    assert code == 2 and "10000" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "t9"])
    assert exc.value.code == 2
    assert run_cli(capsys, "verify", "t3", "--n", "100", "--runs", "50")[0] == 2
    assert run_cli(capsys, "verify", "t3", "--n", "1000", "100", "--runs", "200")[0] == 2
    assert run_cli(capsys, "verify", "t3", "--n", "2", "--runs", "200")[0] == 2
    assert run_cli(capsys, "verify", "cor", "--n", "100", "--runs", "200", "--r", "1", "0")[0] == 2


def test_verify_csv_and_exit_codes(capsys):
    code, out, _ = run_cli(capsys, "verify", "t3", "--n", "100", "1000", "--runs", "500", "--r", "0", "1")
    lines = out.splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 1 + 2 * 3
    # r = 1 at n = 1000 is far from its limit, so the gate row fails
    assert code == 1
    code, out, _ = run_cli(capsys, "verify", "conv", "--n", "100", "--runs", "200")
    assert code in (0, 1)


def test_verify_json_fields(capsys):
    code, out, _ = run_cli(capsys, "--format", "json", "verify", "t1", "--n", "100", "--runs", "500")
    rows = json.loads(out)
    assert list(rows[0]) == HEADER.split(",")
    code2, out2, _ = run_cli(capsys, "verify", "t1", "--n", "100", "--runs", "500", "--format", "json")
    assert out2 == out and code2 == code


def test_sweep_is_thread_independent(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "t2", "--n", "100", "300", "--runs", "600"]
    assert cli.main(args + ["--threads", "1", "--out", str(a)]) == 0
    assert cli.main(args + ["--threads", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_single_point_equals_verify(capsys):
    verify.clear_cache()
    _, v_out, _ = run_cli(capsys, "verify", "trick", "--n", "1000", "--runs", "800")
    _, s_out, _ = run_cli(capsys, "sweep", "trick", "--n", "1000", "--runs", "800")
    assert v_out == s_out


def test_env_threads_fallback(monkeypatch, capsys):
    monkeypatch.setenv("CCP_THREADS", "2")
    from ccp import sim
    assert sim.resolve_threads(None) == 2
    assert sim.resolve_threads(5) == 5


def test_timing_flag(capsys):
    _, out, _ = run_cli(capsys, "verify", "t1", "--n", "100", "--runs", "200", "--timing")
    ms = [float(line.split(",")[-1]) for line in out.splitlines()[1:]]
    assert any(m > 0 for m in ms)
    _, out, _ = run_cli(capsys, "verify", "t1", "--n", "100", "--runs", "200")
    assert all(line.endswith(",0") for line in out.splitlines()[1:])


def test_law_command(capsys):
    code, out, _ = run_cli(capsys, "law", "gumbel", "--r", "0", "--x", "0")
    assert out == "x,cdf\n0,0.367879441171\n"
    code, out, _ = run_cli(capsys, "law", "geom", "--r", "2", "--fn", "pmf", "--x", "1")
    assert out.splitlines()[1] == "1,0.222222222222"
    code, out, _ = run_cli(capsys, "law", "geomsum", "--index-set", "N", "--fn", "pmf", "--x", "0")
    assert out.splitlines()[1] == "0,0.367879441171"
    code, out, _ = run_cli(capsys, "law", "mixedpoisson", "--s", "2", "--fn", "pgf", "--x", "0")
    assert out.splitlines()[1] == "0,0.4"
    code, out, _ = run_cli(capsys, "law", "logistic", "--r1", "0", "--r2", "1", "--grid", "-1", "1", "3")
    assert len(out.splitlines()) == 4 and out.splitlines()[2] == "0,0.5"
    assert run_cli(capsys, "law", "exp", "--fn", "pmf", "--x", "1")[0] == 2


def test_simulate_command(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--n", "10", "--r-max", "2", "--backend", "discrete",
                           "--runs", "4", "--delays", "auto", "--include-runs")
    d = json.loads(out)
    assert code == 0 and d["config"]["delays"] == [8, 17] and len(d["runs"]["u_hat"]) == 4
    code, out, _ = run_cli(capsys, "simulate", "--n", "2", "--runs", "10", "--w0")
    assert "w0_mean" in json.loads(out)["summary"]
    code, _, err = run_cli(capsys, "simulate", "--n", "10", "--delays", "3")
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ccp", "exact", "hyperharmonic", "--n", "3", "--r", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "11/6 ≈ 1.833333"
