import csv
import json

import numpy as np
import pytest

from cransim.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(argv):
    return main(argv)


class TestAnalyticCommand:
    def test_mse_bound_spot_value(self, capsys):
        code = run([
            "analytic", "mse-bound", "--alpha", "4", "--density", "1", "--rayleigh",
            "--np", "81", "--s", "40", "--noise", "0", "--metric", "average",
        ])
        out = capsys.readouterr().out.strip()
        assert code == 0
        assert float(out) == pytest.approx(0.004968954596201894, rel=1e-10)

    def test_optimal_s(self, capsys):
        code = run(["analytic", "optimal-s", "--alpha", "4", "--rayleigh", "--np", "81"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "40"

    def test_missing_required_flag_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["analytic", "mse-bound", "--np", "81", "--s", "40"])  # no --alpha
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_missing_op_specific_flag_returns_two(self, capsys):
        code = run(["analytic", "mse-bound", "--alpha", "4", "--s", "40"])  # no --np
        assert code == 2
        assert "required" in capsys.readouterr().err

    def test_precondition_violation_named(self, capsys):
        code = run([
            "analytic", "mse-bound", "--alpha", "2", "--np", "81", "--s", "40",
        ])
        err = capsys.readouterr().err
        assert code == 2
        assert "alpha" in err

    def test_power_cdf_spot_value(self, capsys):
        code = run([
            "analytic", "power-cdf", "--alpha", "4", "--moment", "1",
            "--delta", str(np.pi**2), "--s", "1",
        ])
        assert code == 0
        assert float(capsys.readouterr().out) == pytest.approx(np.exp(-1), rel=1e-9)

    def test_csv_output_with_manifest(self, tmp_path, capsys):
        out = tmp_path / "value.csv"
        code = run([
            "analytic", "residual-power", "--alpha", "4", "--rayleigh",
            "--s", "10", "--out", str(out),
        ])
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 1
        assert float(rows[0]["value"]) == pytest.approx(0.8612854633416617, rel=1e-10)
        manifest = json.loads(out.with_suffix(".manifest.json").read_text())
        assert manifest["tool"] == "cransim"


class TestSimulateCommand:
    BASE = [
        "simulate", "--estimator", "oracle", "--n-rrh", "60", "--np", "21",
        "--s", "5", "--alpha", "4", "--trials", "12", "--seed", "7",
    ]

    def test_same_seed_byte_identical(self, tmp_path, capsys):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(self.BASE + ["--out", str(out1)]) == 0
        assert run(self.BASE + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_worker_count_does_not_change_output(self, tmp_path, monkeypatch, capsys):
        out1, out2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
        monkeypatch.setenv("CRANSIM_WORKERS", "1")
        assert run(self.BASE + ["--out", str(out1)]) == 0
        monkeypatch.setenv("CRANSIM_WORKERS", "2")
        assert run(self.BASE + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_overhead_report_line(self, tmp_path, capsys):
        out = tmp_path / "o.csv"
        code = run([
            "simulate", "--estimator", "oracle", "--n-rrh", "500", "--np", "81",
            "--s", "10", "--trials", "2", "--seed", "3", "--out", str(out),
        ])
        assert code == 0
        assert "overhead reduction 83.8%" in capsys.readouterr().out

    def test_zero_trials_rejected(self, tmp_path, capsys):
        code = run(self.BASE[:-4] + ["--trials", "0", "--out", str(tmp_path / "x.csv")])
        assert code == 2
        assert "trials" in capsys.readouterr().err

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = {
            "n_rrh": 60, "n_pilots": 21, "s": 5, "alpha": 4.0, "trials": 12,
            "estimator": "oracle", "master_seed": 7,
            "fading": {"kind": "rayleigh-unit"},
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        out1 = tmp_path / "c.csv"
        assert run(["simulate", "--config", str(path), "--out", str(out1)]) == 0
        # flags win over the file
        out2 = tmp_path / "d.csv"
        assert run([
            "simulate", "--config", str(path), "--trials", "6", "--out", str(out2),
        ]) == 0
        assert read_csv(out2)[0]["trials"] == "6"

    def test_unknown_config_field_named(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n_rhh": 10}))
        code = run(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")])
        assert code == 2
        assert "n_rhh" in capsys.readouterr().err

    def test_manifest_reruns_identically(self, tmp_path, capsys):
        out1 = tmp_path / "m.csv"
        assert run(self.BASE + ["--out", str(out1)]) == 0
        manifest = out1.with_suffix(".manifest.json")
        out2 = tmp_path / "m2.csv"
        assert run(["simulate", "--config", str(manifest), "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_sweep_with_failing_row_exits_nonzero(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        code = run(self.BASE + [
            "--out", str(out), "--sweep-axis", "s", "--sweep-values", "5", "1000",
        ])
        assert code == 1
        rows = read_csv(out)
        assert rows[0]["error"] == ""
        assert rows[1]["error"] != ""

    def test_cs_sweep_runs(self, tmp_path, capsys):
        out = tmp_path / "cs.csv"
        code = run([
            "simulate", "--estimator", "omp", "--n-rrh", "40", "--np", "17",
            "--s", "4", "--alpha", "4", "--trials", "5", "--seed", "11",
            "--out", str(out),
        ])
        assert code == 0
        row = read_csv(out)[0]
        assert float(row["mse_tot"]) > 0
        assert row["mse_av"] == ""


class TestFigureRecipes:
    def test_fig1_small_grid(self, tmp_path, capsys):
        out = tmp_path / "fig1.csv"
        code = run([
            "fig1", "--out", str(out), "--alphas", "4", "--s-values", "10", "20",
            "--trials", "15", "--n-rrh", "80", "--np", "41", "--seed", "3",
        ])
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 2
        for row in rows:
            assert float(row["mse_av"]) > 0
            assert float(row["bound_av"]) > 0

    def test_fig2_columns_and_structure(self, tmp_path, capsys):
        out = tmp_path / "fig2.csv"
        code = run([
            "fig2", "--out", str(out),
            "--np-values", "41", "81", "161",
            "--noise-values", "0", "0.1",
            "--alphas", "2.5", "3", "4", "5", "6",
        ])
        assert code == 0
        rows = read_csv(out)
        noiseless = [r for r in rows if float(r["noise_var"]) == 0.0]
        assert noiseless, "fig2 must include the noiseless rows"
        for row in noiseless:
            # same minimizer for both metrics without noise
            assert row["s_opt_average"] == row["s_opt_total"]
            # asymptotic support size is a tight indicator
            diff = int(row["s_opt_average"]) - int(row["s_asymptotic_rounded"])
            assert abs(diff) <= 2
        noisy = [r for r in rows if float(r["noise_var"]) == 0.1]
        non_monotone = 0
        for n_pilots in {r["n_pilots"] for r in noisy}:
            curve = [
                int(r["s_opt_average"])
                for r in sorted(
                    (r for r in noisy if r["n_pilots"] == n_pilots),
                    key=lambda r: float(r["alpha"]),
                )
            ]
            rises = any(b > a for a, b in zip(curve, curve[1:]))
            falls = any(b < a for a, b in zip(curve, curve[1:]))
            non_monotone += rises and falls
        assert non_monotone >= 1

    def test_fig3_small_grid(self, tmp_path, capsys):
        out = tmp_path / "fig3.csv"
        code = run([
            "fig3", "--out", str(out), "--alphas", "5", "--np-values", "20", "30",
            "--trials", "3", "--n-rrh", "60", "--seed", "3",
        ])
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 2
        for row in rows:
            assert float(row["mse_tot"]) >= 0
            assert row["s_opt"] != ""
            assert float(row["bound_tot_at_opt"]) > 0

    def test_validate_appendix_prints_ks(self, tmp_path, capsys):
        out = tmp_path / "ks.csv"
        code = run([
            "validate-appendix", "--s-values", "1", "2", "--samples", "1000",
            "--side", "80", "--seed", "5", "--out", str(out),
        ])
        assert code == 0
        printed = capsys.readouterr().out
        assert "s=1 ks=" in printed and "s=2 ks=" in printed
        rows = read_csv(out)
        assert len(rows) == 2
        assert all(float(r["ks_distance"]) < 0.06 for r in rows)


class TestVersion:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["--version"])
        assert exc.value.code == 0
