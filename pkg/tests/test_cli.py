import json
import subprocess
import sys

import numpy as np
import pytest

from hetcause.cli import dispatch
from hetcause.dataio import load_csv


def run_cli(*argv):
    return dispatch(list(argv))


def read_stderr_kind(capsys):
    err = capsys.readouterr().err
    return json.loads(err.splitlines()[-1])["error"]["kind"]


@pytest.fixture
def sim_csv(tmp_path):
    path = tmp_path / "sim.csv"
    code = run_cli("simulate", "--case", "2", "--c", "0.5", "--T", "120",
                   "--seed", "3", "--out", str(path))
    assert code == 0
    return path


class TestSimulate:
    def test_writes_csv_and_manifest(self, sim_csv):
        ds = load_csv(sim_csv)
        assert ds.T == 120 and ds.d == 2
        manifest = json.loads((sim_csv.parent / "sim.csv.manifest.json").read_text())
        assert manifest["manifest"]["subcommand"] == "simulate"
        assert manifest["manifest"]["seed"] == 3
        assert "duration_seconds" in manifest["timing"]

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run_cli("simulate", "--case", "1", "--T", "50",
                           "--seed", "9", "--out", str(out)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_case1_rejects_c(self, tmp_path, capsys):
        code = run_cli("simulate", "--case", "1", "--c", "0.5", "--T", "10",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert read_stderr_kind(capsys) == "usage"


class TestFit:
    def test_noiseless_ar_coefficients(self, tmp_path, capsys):
        path = tmp_path / "ar.csv"
        values = 0.5 ** np.arange(12)
        path.write_text("y\n" + "\n".join(format(v, ".17g") for v in values) + "\n")
        assert run_cli("fit", "--input", str(path), "--p", "1") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["coefficients"][0][0][0] == pytest.approx(0.5, abs=1e-12)
        assert payload["T_effective"] == 11

    def test_out_file_with_manifest(self, sim_csv, tmp_path):
        out = tmp_path / "fit.json"
        assert run_cli("fit", "--input", str(sim_csv), "--p", "1",
                       "--out", str(out)) == 0
        payload = json.loads(out.read_text())
        assert len(payload["coefficients"]) == 1
        assert (tmp_path / "fit.json.manifest.json").exists()

    def test_diagnostic_lags(self, sim_csv, capsys):
        assert run_cli("fit", "--input", str(sim_csv), "--p", "1",
                       "--diagnostic-lags", "6") == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["box_pierce"]["note"] == "heteroscedasticity-naive"

    def test_missing_input(self, tmp_path, capsys):
        assert run_cli("fit", "--input", str(tmp_path / "nope.csv"), "--p", "1") == 1
        assert read_stderr_kind(capsys) == "data"


class TestTest:
    def test_json_array_of_results(self, sim_csv, capsys):
        code = run_cli("test", "--input", str(sim_csv), "--p", "1", "--d1", "1",
                       "--methods", "st,w,b", "--B", "39", "--seed", "7")
        assert code == 0
        results = json.loads(capsys.readouterr().out)
        assert [r["method"] for r in results] == ["st", "w", "b"]
        boot = results[2]
        assert boot["B"] == 39 and boot["seed"] == 7
        assert 0.0 < boot["p_value"] <= 1.0

    def test_unknown_method_is_usage_error(self, sim_csv, capsys):
        assert run_cli("test", "--input", str(sim_csv), "--p", "1", "--d1", "1",
                       "--methods", "q") == 1
        assert read_stderr_kind(capsys) == "usage"

    def test_varhac_flag_conflict(self, sim_csv, capsys):
        code = run_cli("test", "--input", str(sim_csv), "--p", "1", "--d1", "1",
                       "--methods", "h", "--varhac-m", "2", "--varhac-aic")
        assert code == 1
        assert read_stderr_kind(capsys) == "usage"

    def test_env_seed_fallback(self, sim_csv, capsys, monkeypatch):
        monkeypatch.setenv("HETCAUSE_SEED", "55")
        run_cli("test", "--input", str(sim_csv), "--p", "1", "--d1", "1",
                "--methods", "b", "--B", "19")
        results = json.loads(capsys.readouterr().out)
        assert results[0]["seed"] == 55

    def test_column_reorder_flips_partition(self, sim_csv, capsys):
        run_cli("test", "--input", str(sim_csv), "--p", "1", "--d1", "1",
                "--methods", "w")
        direct = json.loads(capsys.readouterr().out)[0]
        run_cli("test", "--input", str(sim_csv), "--p", "1", "--d1", "1",
                "--methods", "w", "--columns", "x2,x1")
        flipped = json.loads(capsys.readouterr().out)[0]
        # scalar cross block: the statistic is symmetric in the ordering
        assert flipped["statistic"] == pytest.approx(direct["statistic"], rel=1e-12)


class TestMonteCarloCommands:
    def test_mc_csv_schema(self, tmp_path):
        out = tmp_path / "table.csv"
        code = run_cli("mc", "--case", "1", "--T", "60", "--levels", "0.05",
                       "--N", "5", "--B", "19", "--seed", "1", "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "T,alpha,method,reject_freq,N"
        assert len(lines) == 1 + 3  # st, w, b
        assert all(line.split(",")[0] == "60" for line in lines[1:])

    def test_mc_deterministic_artifact(self, tmp_path):
        outs = []
        for name in ("t1.csv", "t2.csv"):
            out = tmp_path / name
            run_cli("mc", "--case", "2", "--c", "0.5", "--T", "50",
                    "--levels", "0.05,0.10", "--N", "4", "--B", "9",
                    "--seed", "2", "--out", str(out))
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_mc_fast_profile_defaults(self, tmp_path):
        out = tmp_path / "fast.csv"
        run_cli("mc", "--case", "1", "--T", "50", "--levels", "0.05",
                "--N", "3", "--fast", "--seed", "1", "--out", str(out))
        manifest = json.loads((tmp_path / "fast.csv.manifest.json").read_text())
        params = manifest["manifest"]["parameters"]
        assert params["N"] == 3  # explicit N wins
        assert params["B"] == 199  # fast default fills in B

    def test_mc_case1_rejects_c(self, tmp_path, capsys):
        code = run_cli("mc", "--case", "1", "--c", "0.5", "--T", "50",
                       "--levels", "0.05", "--N", "2", "--B", "9",
                       "--seed", "1", "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert read_stderr_kind(capsys) == "usage"

    def test_mc_non_pd_is_numerical_error(self, tmp_path, capsys):
        code = run_cli("mc", "--case", "2", "--c", "0.9", "--T", "60",
                       "--levels", "0.05", "--N", "2", "--B", "9",
                       "--seed", "1", "--out", str(tmp_path / "x.csv"))
        assert code == 2
        assert read_stderr_kind(capsys) == "numerical"

    def test_power_curve_csv(self, tmp_path):
        out = tmp_path / "curve.csv"
        code = run_cli("power-curve", "--c", "0.2,0.5", "--T", "50",
                       "--N", "4", "--B", "9", "--seed", "3",
                       "--methods", "b", "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "c,method,reject_freq,N"
        assert len(lines) == 3
        assert lines[1].startswith("0.2") and lines[2].startswith("0.5")

    def test_power_curve_range_syntax(self, tmp_path):
        out = tmp_path / "curve.csv"
        run_cli("power-curve", "--c", "0.1:0.3:0.1", "--T", "50",
                "--N", "2", "--B", "9", "--seed", "3", "--methods", "w",
                "--out", str(out))
        rows = out.read_text().splitlines()[1:]
        # 17 significant digits round-trip exactly to the grid values
        assert [float(r.split(",")[0]) for r in rows] == [0.1, 0.1 + 0.1, 0.1 + 0.1 + 0.1]


class TestKernelvar:
    def test_curve_csv_schema(self, sim_csv, tmp_path):
        out = tmp_path / "curve.csv"
        code = run_cli("kernelvar", "--input", str(sim_csv), "--p", "1",
                       "--d1", "1", "--grid-size", "10", "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "r,i,j,sigma_hat"
        assert len(lines) == 1 + 10 * 4  # grid * d^2

    def test_tiny_bandwidth_exit_2(self, sim_csv, tmp_path, capsys):
        code = run_cli("kernelvar", "--input", str(sim_csv), "--p", "1",
                       "--d1", "1", "--bandwidth", "1e-9",
                       "--out", str(tmp_path / "x.csv"))
        assert code == 2
        assert read_stderr_kind(capsys) == "numerical"


class TestDispatch:
    def test_no_subcommand(self, capsys):
        assert run_cli() == 1
        assert read_stderr_kind(capsys) == "usage"

    def test_unknown_flag(self, capsys):
        assert run_cli("simulate", "--bogus", "1") == 1
        assert read_stderr_kind(capsys) == "usage"

    def test_installed_entry_point(self):
        out = subprocess.run(
            [sys.executable, "-m", "hetcause.cli", "--version"],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert out.stdout.strip() == "0.1.0"
