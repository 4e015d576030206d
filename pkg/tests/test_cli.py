import math

import numpy as np
import pytest

from lfso import cli
from lfso.verify import fit_linear_rate


def run_cli(args):
    return cli.main([str(a) for a in args])


def read_csv(path):
    return cli.read_trace_csv(str(path))


class TestRunCommand:
    def test_norm_power_p2_ratio_column(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        assert run_cli(["run", "--problem", "norm2-pow", "--d", "10",
                        "--p", "2", "--eta", "1", "--max-iters", "100",
                        "--out", out]) == 0
        columns = read_csv(out)
        for k in (0, 1, 10, 50, 100):
            expected = (26.0 / 27.0) ** (3 * k)
            assert columns["grad_ratio"][k] == pytest.approx(expected, rel=1e-9)
        summary = capsys.readouterr().out
        assert "termination=max-iterations" in summary
        assert "rate=linear" in summary

    def test_lp_norm_p2_ratio_column(self, tmp_path):
        out = tmp_path / "trace.csv"
        assert run_cli(["run", "--problem", "lp-norm", "--d", "10", "--p", "2",
                        "--eta", "1", "--max-iters", "80", "--out", out]) == 0
        columns = read_csv(out)
        for k in (1, 40, 80):
            expected = (11.0 / 12.0) ** (3 * k)
            assert columns["grad_ratio"][k] == pytest.approx(expected, rel=1e-9)

    def test_norm_power_p1_one_step(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        assert run_cli(["run", "--problem", "norm2-pow", "--p", "1",
                        "--out", out]) == 0
        summary = capsys.readouterr().out
        assert "termination=stationary-exact" in summary
        assert "final_grad_ratio=0" in summary
        columns = read_csv(out)
        assert columns["k"] == [0.0, 1.0]
        assert columns["grad_ratio"][-1] == 0.0

    def test_quartic_default_policy(self, tmp_path):
        out = tmp_path / "q.csv"
        assert run_cli(["run", "--problem", "quartic", "--max-iters", "50",
                        "--out", out]) == 0
        columns = read_csv(out)
        assert columns["R"][0] == 0.1
        assert columns["R_tilde"][0] == pytest.approx(4.0 / 24.24, rel=1e-12)

    def test_fixed_solver_quadratic(self, tmp_path):
        out = tmp_path / "f.csv"
        assert run_cli(["run", "--problem", "norm2-pow", "--p", "1",
                        "--solver", "fixed", "--eta", "0.01",
                        "--max-iters", "200", "--out", out]) == 0
        columns = read_csv(out)
        assert columns["grad_ratio"][100] == pytest.approx(0.98 ** 100, rel=1e-10)
        assert columns["L"][0] == 100.0  # 1/eta sentinel

    def test_csv_header_and_consistency(self, tmp_path):
        out = tmp_path / "t.csv"
        run_cli(["run", "--problem", "norm2-pow", "--p", "3",
                 "--max-iters", "40", "--out", out])
        with open(out) as fh:
            assert fh.readline().strip() == \
                "k,f,grad_norm,R,R_tilde,L,step_norm,grad_ratio"
        columns = read_csv(out)
        g0 = columns["grad_norm"][0]
        for gn, ratio in zip(columns["grad_norm"], columns["grad_ratio"]):
            assert ratio == gn / g0
        assert columns["k"] == list(map(float, range(41)))

    def test_csv_round_trip_reproduces_fit(self, tmp_path):
        out = tmp_path / "t.csv"
        run_cli(["run", "--problem", "lp-norm", "--p", "3",
                 "--max-iters", "300", "--out", out])
        ratios = read_csv(out)["grad_ratio"]
        fit = fit_linear_rate(ratios)
        expected_slope = 5.0 * math.log(1.0 - 1.0 / 80.0)
        assert fit.slope == pytest.approx(expected_slope, rel=1e-9)
        # 17 significant digits round-trip exactly
        refit = fit_linear_rate([float(v) for v in ratios])
        assert refit.slope == fit.slope

    def test_regression_file_problem(self, tmp_path):
        data = tmp_path / "system.txt"
        data.write_text("3 3\n1 0 0\n0 1 0\n0 0 1\n0.5 -1 2\n")
        out = tmp_path / "r.csv"
        assert run_cli(["run", "--problem", "regression-file", "--data", data,
                        "--p", "2", "--max-iters", "300", "--grad-tol", "1e-12",
                        "--out", out]) == 0
        columns = read_csv(out)
        assert columns["grad_ratio"][-1] <= 1e-9

    def test_x0_from_file(self, tmp_path):
        x0 = tmp_path / "start.txt"
        x0.write_text("2.0\n")
        out = tmp_path / "q.csv"
        assert run_cli(["run", "--problem", "quartic", "--x0", x0,
                        "--max-iters", "5", "--out", out]) == 0
        columns = read_csv(out)
        assert columns["f"][0] == 16.0

    def test_run_starting_at_minimizer(self, tmp_path):
        x0 = tmp_path / "zeros.txt"
        x0.write_text(" ".join(["0.0"] * 10))
        out = tmp_path / "z.csv"
        assert run_cli(["run", "--problem", "norm2-pow", "--p", "2",
                        "--x0", x0, "--out", out]) == 0
        columns = read_csv(out)
        assert columns["k"] == [0.0]
        assert columns["grad_ratio"] == [0.0]

    def test_custom_constant_policy(self, tmp_path):
        out = tmp_path / "t.csv"
        assert run_cli(["run", "--problem", "quartic", "--r-policy",
                        "constant:0.5", "--max-iters", "3", "--out", out]) == 0
        assert read_csv(out)["R"][0] == 0.5

    def test_policy_problem_mismatch_exits_2(self, tmp_path, capsys):
        assert run_cli(["run", "--problem", "quartic", "--r-policy",
                        "grad-g-norm", "--out", tmp_path / "t.csv"]) == 2
        assert "composition" in capsys.readouterr().err

    def test_unknown_policy_exits_2(self, tmp_path):
        assert run_cli(["run", "--problem", "quartic", "--r-policy",
                        "biggest", "--out", tmp_path / "t.csv"]) == 2


class TestConfigFile:
    def test_config_supplies_values(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        out = tmp_path / "t.csv"
        cfg.write_text(
            "# experiment settings\n"
            "problem = lp-norm\n"
            "p = 3\n"
            "max_iters = 50   # short run\n"
            f"out_path = {out}\n")
        assert run_cli(["run", "--config", cfg]) == 0
        columns = read_csv(out)
        assert len(columns["k"]) == 51

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        out = tmp_path / "t.csv"
        cfg.write_text("problem = lp-norm\np = 3\nmax_iters = 50\n")
        assert run_cli(["run", "--config", cfg, "--p", "2", "--max-iters", "30",
                        "--out", out]) == 0
        columns = read_csv(out)
        assert len(columns["k"]) == 31
        assert columns["grad_ratio"][1] == pytest.approx((11.0 / 12.0) ** 3,
                                                         rel=1e-9)

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("stepsize = 12\n")
        assert run_cli(["run", "--config", cfg]) == 2
        assert "unknown config key" in capsys.readouterr().err

    def test_bad_value_exits_2(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("max_iters = soon\n")
        assert run_cli(["run", "--config", cfg]) == 2

    def test_malformed_line_exits_2(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("just some words\n")
        assert run_cli(["run", "--config", cfg]) == 2


class TestUsageErrors:
    def test_missing_data_file_flag(self, tmp_path):
        assert run_cli(["run", "--problem", "regression-file",
                        "--out", tmp_path / "x.csv"]) == 2

    def test_eta_out_of_range_for_lfso(self, tmp_path):
        assert run_cli(["run", "--problem", "norm2-pow", "--eta", "2.5",
                        "--out", tmp_path / "x.csv"]) == 2

    def test_unknown_problem_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["run", "--problem", "banana"])
        assert exc.value.code == 2

    def test_divergent_fixed_run_exits_2(self, tmp_path, capsys):
        with np.errstate(over="ignore"):
            assert run_cli(["run", "--problem", "norm2-pow", "--p", "2",
                            "--solver", "fixed", "--eta", "1.0",
                            "--out", tmp_path / "x.csv"]) == 2
        assert "diverged" in capsys.readouterr().err


class TestReproduce:
    def test_fig2a_deterministic(self, tmp_path):
        dir_a = tmp_path / "a"
        dir_b = tmp_path / "b"
        assert run_cli(["reproduce", "--figure", "fig2a", "--out-dir", dir_a,
                        "--max-iters", "300"]) == 0
        assert run_cli(["reproduce", "--figure", "fig2a", "--out-dir", dir_b,
                        "--max-iters", "300"]) == 0
        for p in range(1, 6):
            name = f"fig2a_p{p}.csv"
            assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()
        assert (dir_a / "fig2a.svg").read_bytes() == \
            (dir_b / "fig2a.svg").read_bytes()

    def test_fig2a_curves_decrease(self, tmp_path):
        out = tmp_path / "figs"
        run_cli(["reproduce", "--figure", "fig2a", "--out-dir", out,
                 "--max-iters", "400"])
        for p in range(2, 6):
            ratios = read_csv(out / f"fig2a_p{p}.csv")["grad_ratio"]
            assert all(b < a for a, b in zip(ratios, ratios[1:]))

    def test_svg_self_contained(self, tmp_path):
        out = tmp_path / "figs"
        run_cli(["reproduce", "--figure", "fig2b", "--out-dir", out,
                 "--max-iters", "200"])
        svg = (out / "fig2b.svg").read_text()
        assert svg.startswith("<svg")
        assert svg.rstrip().endswith("</svg>")
        for banned in ("<image", "@import", "url(", "href="):
            assert banned not in svg
        assert svg.count("<polyline") == 5

    def test_fig1a_eta_override(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("fig1a_eta_p2 = 0.005\n")
        run_cli(["reproduce", "--figure", "fig1a", "--out-dir",
                 tmp_path / "figs", "--max-iters", "50", "--config", cfg])
        assert "fig1a p=2 eta=0.005" in capsys.readouterr().out

    def test_all_figures(self, tmp_path):
        out = tmp_path / "figs"
        assert run_cli(["reproduce", "--figure", "all", "--out-dir", out,
                        "--max-iters", "40"]) == 0
        for figure in ("fig1a", "fig1b", "fig2a", "fig2b"):
            assert (out / f"{figure}.svg").exists()
            for p in range(1, 6):
                assert (out / f"{figure}_p{p}.csv").exists()

    def test_bad_figure_rejected(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(["reproduce", "--figure", "fig3"])
        assert exc.value.code == 2


class TestVerifyCommand:
    def test_clean_suite_exits_0(self, capsys):
        assert run_cli(["verify", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "total_violations = 0" in out
        assert "overall = ok" in out

    def test_controls_exit_1(self, capsys):
        assert run_cli(["verify", "--seed", "3", "--include-controls"]) == 1
        out = capsys.readouterr().out
        assert "CONTROL wrong-oracle" in out
        assert "overall = FAIL" in out

    def test_report_deterministic(self, capsys):
        run_cli(["verify", "--seed", "11"])
        first = capsys.readouterr().out
        run_cli(["verify", "--seed", "11"])
        second = capsys.readouterr().out
        assert first == second

    def test_seed_env_default(self, monkeypatch):
        monkeypatch.setenv("LFSO_SEED", "77")
        parser = cli.build_parser()
        args = parser.parse_args(["verify"])
        assert args.seed == 77
