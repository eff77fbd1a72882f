import csv
import io
import json
import os
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from sturmian_stats.cli import config_to_argv, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_cdf_grid_rows(capsys):
    code, out, _ = run(capsys, "cdf", "--spec", "S", "--n", "100", "--lambda", "2:6:0.1")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 41
    assert rows[0]["lambda"] == "2" and rows[-1]["lambda"] == "6"
    assert float(rows[10]["F_n_exact"]) == pytest.approx(0.29411621151531028, abs=1e-14)
    assert out.startswith("# config: ")


def test_cdf_nu_at_one(capsys):
    code, out, _ = run(capsys, "cdf", "--spec", "nu", "--n", "50", "--lambda", "1")
    assert code == 0
    assert float(rows_of(out)[0]["F_n_exact"]) == 1.0


def test_cdf_custom_spec(capsys):
    code, out, _ = run(capsys, "cdf", "--spec", "1,1,0,0,1,0", "--n", "40", "--lambda", "2,3")
    assert code == 0 and len(rows_of(out)) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["cdf", "--spec", "bogus", "--n", "10", "--lambda", "1"],
        ["cdf", "--spec", "S", "--n", "0", "--lambda", "3"],
        ["cdf", "--spec", "S", "--n", "10", "--lambda", "3:2:0.1"],
        ["series", "--alpha", "pi", "--n-max", "5"],
        ["density", "--law", "xi", "--lambda", "0.5"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_refusal_exits_1(capsys):
    code, _, err = run(capsys, "series", "--alpha", "rat:3/8", "--n-max", "20")
    assert code == 1 and "refused" in err


def test_density_and_series(capsys):
    code, out, _ = run(capsys, "density", "--law", "mu", "--lambda", "0.5")
    assert float(rows_of(out)[0]["density"]) == pytest.approx(0.7461765808717176)
    code, out, _ = run(capsys, "series", "--alpha", "cf:(1)*", "--n-max", "8")
    rows = rows_of(out)
    # continuants 1, 1, 2, 3, 5, 8, 13
    assert [r["S_exact"] for r in rows[:3]] == ["4", "7/2", "11/3"]


def test_json_output_matches_schema(capsys, tmp_path):
    schema = json.loads(resources.files("sturmian_stats").joinpath("output.schema.json").read_text())
    for argv in (
        ["cdf", "--spec", "rho", "--n", "30", "--lambda", "0.25,0.5"],
        ["histogram", "--spec", "nu", "--n", "50", "--M", "500", "--seed", "3"],
        ["count", "--n", "20", "--exact", "--c", "kappa^2"],
        ["condexp", "--gamma", "mu", "--n", "50", "--M", "2000", "--seed", "1"],
    ):
        code, out, _ = run(capsys, *argv, "--format", "json")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, schema)
        assert all(len(r) == len(doc["columns"]) for r in doc["rows"])


def test_histogram_meta(capsys):
    code, out, _ = run(capsys, "histogram", "--spec", "S", "--n", "100", "--M", "2000", "--seed", "5")
    assert "# overflow: " in out and "# samples: 2000" in out
    assert len(rows_of(out)) == 40


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_rerun_reproduces_bytes(capsys, tmp_path, fmt):
    first = tmp_path / f"a.{fmt}"
    second = tmp_path / f"b.{fmt}"
    argv = ["histogram", "--spec", "mu", "--n", "64", "--M", "3000", "--step", "1/20", "--seed", "11"]
    assert main(argv + ["--format", fmt, "--out", str(first)]) == 0
    assert main(["rerun", str(first), "--format", fmt, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_config_roundtrip():
    cfg = {"subcommand": "cdf", "version": "x", "spec": "S", "n": 5, "lam": "2:3:0.5", "method": "mobius", "tol": 1e-4}
    argv = config_to_argv(cfg)
    assert argv[0] == "cdf" and "--lambda" in argv and "2:3:0.5" in argv


def test_seed_from_environment(tmp_path):
    env = dict(os.environ, STURMIAN_SEED="4242")
    cmd = [sys.executable, "-m", "sturmian_stats.cli", "histogram", "--spec", "nu", "--n", "30", "--M", "300"]
    a = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(cmd + ["--seed", "4242"], env=env, capture_output=True, text=True, check=True).stdout
    assert '"seed": 4242' in a
    assert a == b


def test_verify_small(capsys):
    code, out, err = run(capsys, "verify", "--n-max", "12", "--samples", "5", "--seed", "2")
    assert code == 0 and "all checks passed" in err


def test_entry_point_installed():
    r = subprocess.run(["sturmian-stats", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
