import csv
import io
import math

import pytest

from sslgauss.cli import main
from sslgauss.gmodel import load_dataset
from sslgauss.harness import CSV_HEADER


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def kv(out: str) -> dict:
    pairs = {}
    for line in out.splitlines():
        if ":" in line and "," not in line.split(":")[0]:
            key, _, value = line.partition(":")
            pairs[key.strip()] = value.strip()
    return pairs


class TestRegion:
    def test_blue_point(self, capsys):
        code, out, _ = run_cli(capsys, "region", "--alpha", "0.4",
                               "--beta", "0.5", "--gamma", "1.5")
        assert code == 0
        values = kv(out)
        assert values["region"] == "SSL_EASY_BLUE"
        assert float(values["1-alpha"]) == pytest.approx(0.6)
        assert float(values["1-gamma*alpha"]) == pytest.approx(0.4)
        assert float(values["0.5-alpha"]) == pytest.approx(0.1)

    def test_domain_error_exit(self, capsys):
        code, _, err = run_cli(capsys, "region", "--alpha", "0.9",
                               "--beta", "0.5", "--gamma", "1.5")
        assert code == 1
        assert "alpha" in err


class TestBounds:
    def test_reference_thresholds(self, capsys):
        code, out, _ = run_cli(capsys, "bounds", "--p", "100000", "--k", "100",
                               "--lambda", "3", "--delta", "0")
        assert code == 0
        values = kv(out)
        want = (200.0 / 3.0) * math.log(99901)
        assert float(values["sl_max_L"]) == pytest.approx(want, rel=1e-9)
        assert float(values["ul_max_n"]) == pytest.approx(want, rel=1e-9)
        assert values["verdict"] == "below-bound"

    def test_csv_row_written(self, capsys, tmp_path):
        path = tmp_path / "bounds.csv"
        code, out, _ = run_cli(capsys, "bounds", "--p", "1000", "--k", "10",
                               "--lambda", "2", "--delta", "0.5",
                               "--L", "5", "--n", "7", "--out", str(path))
        assert code == 0
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "p,k,lambda,delta,L,n,sl_max_L,ul_max_n,q,verdict"
        row = lines[1].split(",")
        assert row[0] == "1000" and row[-1] in ("below-bound", "above-bound")


class TestLowdeg:
    def test_degree_zero(self, capsys):
        code, out, _ = run_cli(capsys, "lowdeg", "--p", "6", "--k", "2",
                               "--L", "1", "--n", "2", "--lambda", "1", "--D", "0")
        assert code == 0
        assert float(kv(out)["exact"]) == 1.0

    def test_small_case(self, capsys):
        code, out, _ = run_cli(capsys, "lowdeg", "--p", "6", "--k", "2",
                               "--L", "1", "--n", "2", "--lambda", "1", "--D", "3")
        assert code == 0
        assert float(kv(out)["exact"]) == pytest.approx(161.0 / 90.0, rel=1e-9)

    def test_infeasible_falls_back_to_mc(self, capsys):
        code, out, err = run_cli(capsys, "lowdeg", "--p", "2000", "--k", "80",
                               "--L", "10", "--n", "200", "--lambda", "0.5",
                               "--D", "4", "--mc-samples", "20000")
        assert code == 0
        values = kv(out)
        assert values["exact"].startswith("infeasible")
        assert "mc_estimate" in values and "mc_stderr" in values
        assert "Monte Carlo" in err

    def test_hard_regime_flag(self, capsys):
        # alpha ~ .333, beta small, gamma < 2 -> inside the hard rectangle
        code, out, _ = run_cli(capsys, "lowdeg", "--p", "1000", "--k", "10",
                               "--L", "4", "--n", "30", "--lambda", "1", "--D", "5")
        assert code == 0
        assert kv(out)["hard_regime"] == "true"


class TestExperimentCommands:
    def test_simulate_end_to_end(self, capsys, tmp_path):
        out_csv = tmp_path / "trials.csv"
        dump = tmp_path / "trial0.ssld"
        code, out, _ = run_cli(
            capsys, "simulate", "--p", "40", "--k", "4", "--lambda", "3",
            "--L", "30", "--n", "60", "--trials", "2", "--seed", "5",
            "--methods", "top_k_labeled,lspca", "--beta-tilde", "0.4",
            "--out", str(out_csv), "--dump", str(dump))
        assert code == 0
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 2 * 2
        assert (tmp_path / "trials.csv.agg.csv").exists()
        ds = load_dataset(dump)
        assert ds.labeled_x.shape == (30, 40)
        assert ds.unlabeled_x.shape == (60, 40)
        values = kv(out)
        assert values["p"] == "40" and values["k"] == "4"

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("p = 60\nk = 4\nlambda = 3.0\nL = 30\nn = 40\n"
                       "methods = top_k_labeled\ntrials = 1\n")
        code, out, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                               "--p", "50", "--seed", "9")
        assert code == 0
        values = kv(out)
        assert values["p"] == "50"      # flag wins
        assert values["k"] == "4"       # file value survives
        assert values["seed"] == "9"

    def test_flag_overrides_config_twin_group(self, capsys, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("p = 64\nk = 4\nlambda = 3.0\nL = 20\nn = 30\n"
                       "methods = top_k_labeled\ntrials = 1\n")
        code, out, _ = run_cli(capsys, "simulate", "--config", str(cfg),
                               "--alpha", "0.5")
        assert code == 0
        assert kv(out)["k"] == "8"  # alpha flag replaces the file's raw k

    def test_sweep_requires_axis(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--p", "30", "--k", "3",
                               "--lambda", "2", "--L", "10", "--n", "10",
                               "--trials", "1", "--methods", "top_k_labeled")
        assert code == 2
        assert "sweep" in err

    def test_sweep_end_to_end(self, capsys, tmp_path):
        out_csv = tmp_path / "sweep.csv"
        code, out, _ = run_cli(
            capsys, "sweep", "--p", "40", "--k", "4", "--lambda", "3",
            "--L", "30", "--trials", "2", "--methods", "top_k_labeled",
            "--sweep-axis", "n", "--sweep-values", "10,30",
            "--out", str(out_csv))
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out_csv.read_text())))
        assert len(rows) == 4
        assert {r["n"] for r in rows} == {"10", "30"}

    def test_failed_trials_nonzero_exit(self, capsys):
        code, _, err = run_cli(
            capsys, "simulate", "--p", "30", "--k", "3", "--lambda", "2",
            "--L", "1", "--n", "20", "--trials", "2", "--methods", "lspca",
            "--beta-tilde", "0.4")
        assert code == 1
        assert "failed" in err


class TestHelp:
    @pytest.mark.parametrize("sub,flags", [
        ("simulate", ["--p", "--k", "--lambda", "--L", "--n", "--alpha", "--beta",
                      "--gamma", "--beta-tilde", "--Gamma", "--trials", "--seed",
                      "--config", "--out", "--threads", "--f32", "--dump"]),
        ("sweep", ["--sweep-axis", "--sweep-values", "--p", "--threads"]),
        ("region", ["--alpha", "--beta", "--gamma"]),
        ("lowdeg", ["--p", "--k", "--L", "--n", "--lambda", "--D", "--mc-samples"]),
        ("bounds", ["--p", "--k", "--lambda", "--delta", "--L", "--n", "--out"]),
    ])
    def test_help_lists_flags_and_defaults(self, capsys, sub, flags):
        code, out, _ = run_cli(capsys, sub, "--help")
        assert code == 0
        for flag in flags:
            assert flag in out
        if sub != "region":  # region's flags are all required, no defaults
            assert "default" in out

    def test_unknown_flag_usage_exit(self, capsys):
        code, _, err = run_cli(capsys, "region", "--alpha", "0.3",
                               "--beta", "0.1", "--gamma", "1.0", "--warp", "9")
        assert code == 2
        assert "usage" in err

    def test_top_level_help(self, capsys):
        code, out, _ = run_cli(capsys, "--help")
        assert code == 0
        for sub in ("simulate", "sweep", "region", "lowdeg", "bounds"):
            assert sub in out
