import json
import os
import subprocess
import sys


from markov_bandits.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_csv_byte_identical(tmp_path, capsys):
    args = ["run", "--preset", "S2", "--policy", "rcam", "--M", "2", "--L", "1", "--n", "2000",
            "--runs", "3", "--seed", "4", "--threads", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(capsys, *args, "--out", str(a))[0] == 0
    assert run_cli(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run_cli(capsys, *args)
    assert out.encode() == a.read_bytes()


def test_run_warns_below_l_min(capsys):
    code, out, err = run_cli(capsys, "run", "--preset", "S2", "--n", "100", "--L", "1")
    assert code == 0 and "below" in err and out.startswith("n,regret_mean")


def test_run_python_backend_matches(capsys):
    args = ["run", "--preset", "S4", "--policy", "ucbm", "--n", "1500", "--runs", "2", "--L", "2"]
    _, a, _ = run_cli(capsys, *args, "--backend", "python")
    _, b, _ = run_cli(capsys, *args)
    assert a == b


def test_run_rejects_mismatch(capsys):
    code, _, err = run_cli(capsys, "run", "--preset", "S2", "--policy", "ucbm", "--mode", "restless", "--n", "10")
    assert code == 2 and "mode" in err
    code, _, _ = run_cli(capsys, "run", "--preset", "S2", "--policy", "ucbm", "--mode", "restless",
                         "--n", "10", "--allow-mismatch")
    assert code == 0


def test_bounds_report(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--preset", "S2", "--L", "360", "--n", "1000", "100000")
    assert code == 0
    assert "362.88" in out
    assert "1.64493406685" in out
    assert "theorem1_rested" in out and "omits" in out


def test_bounds_equal_gap_is_invalid(tmp_path, capsys):
    arm = {"transition": [[0.7, 0.3], [0.3, 0.7]], "rewards": [0.1, 1.0]}
    p = tmp_path / "eq.json"
    p.write_text(json.dumps({"arms": [arm, arm, arm], "M": 1}))
    code, _, err = run_cli(capsys, "bounds", "--config", str(p))
    assert code == 2 and "mu^M" in err


def test_tables(capsys):
    code, out, _ = run_cli(capsys, "tables", "--preset", "S1")
    assert code == 0
    assert "1,0.200000,0.200" in out
    code, out, _ = run_cli(capsys, "tables", "--preset", "S4")
    assert "1,0.460000,0.460" in out
    # S4 channel 9 (0.9/0.8) computes to 0.576471 against a printed 0.577
    assert "9,0.576471,0.577,0.000529" in out
    assert code == 1


def test_validate_ok(tmp_path, capsys):
    p = tmp_path / "ok.json"
    p.write_text(json.dumps({"preset": "S2", "L": 400}))
    code, out, _ = run_cli(capsys, "validate", str(p))
    assert code == 0 and "strict gap: ok" in out and "L_min = 362.88: ok" in out


def test_validate_bad_row_sum(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"arms": [{"transition": [[0.5, 0.4], [0.5, 0.5]], "rewards": [0.1, 1]}], "M": 1}))
    code, _, err = run_cli(capsys, "validate", str(p))
    assert code == 2 and "arms[0].transition" in err and "row 0" in err


def test_validate_condition_failure(tmp_path, capsys):
    p = tmp_path / "periodic.json"
    arms = [{"transition": [[0, 1], [1, 0]], "rewards": [0.1, 1]},
            {"transition": [[0.5, 0.5], [0.5, 0.5]], "rewards": [0.1, 1]}]
    p.write_text(json.dumps({"arms": arms, "M": 1}))
    code, out, _ = run_cli(capsys, "validate", str(p))
    assert code == 3 and "period 2" in out


def test_validate_equal_means_warns(tmp_path, capsys):
    arm = {"transition": [[0.7, 0.3], [0.3, 0.7]], "rewards": [0.1, 1.0]}
    p = tmp_path / "eq.json"
    p.write_text(json.dumps({"arms": [arm, arm], "M": 1}))
    code, out, err = run_cli(capsys, "validate", str(p))
    assert code == 0 and "warning" in err and "strict gap: FAIL" in out


def test_validate_syntax_error_location(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{"preset": "S2",\n "M": }\n')
    code, _, err = run_cli(capsys, "validate", str(p))
    assert code == 2 and ":2:" in err


def test_unknown_key(tmp_path, capsys):
    p = tmp_path / "k.json"
    p.write_text(json.dumps({"preset": "S2", "horizn": 5}))
    code, _, err = run_cli(capsys, "validate", str(p))
    assert code == 2 and "horizn" in err


def test_missing_file(capsys):
    assert run_cli(capsys, "validate", "/nonexistent/x.json")[0] == 2


def test_console_script_and_pure_fallback(tmp_path):
    env = dict(os.environ, MARKOV_BANDITS_PURE="1")
    code = "import markov_bandits; print(markov_bandits.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    args = [sys.executable, "-m", "markov_bandits.cli", "run", "--preset", "S2", "--n", "500", "--runs", "2"]
    pure = subprocess.run(args, env=env, capture_output=True, text=True, check=True).stdout
    fast = subprocess.run(args, capture_output=True, text=True, check=True).stdout
    assert pure == fast
