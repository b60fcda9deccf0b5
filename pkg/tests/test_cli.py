"""End-to-end checks of the experiment harness."""

import json

import numpy as np
import pytest

from nrbk.cli import (EXPERIMENTS, benchmark_convolution, direct_convolution,
                      main, recursive_convolution, run_experiment,
                      sigma_samples)
from nrbk.kernel import KernelParams, build_kernel, eval_sigma

SUBCOMMANDS = ("table1", "zeros", "wn-profile", "nrbc-accuracy",
               "time-convergence", "space-convergence", "simulate",
               "conv-bench")


def read_manifest(out_dir, experiment):
    path = out_dir / (experiment.replace("-", "_") + "_manifest.json")
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


class TestParser:
    def test_all_experiments_registered(self):
        assert tuple(sorted(EXPERIMENTS)) == tuple(sorted(SUBCOMMANDS))

    def test_unknown_experiment_rejected(self):
        with pytest.raises(SystemExit) as info:
            main(["nonsense"])
        assert info.value.code == 2

    def test_missing_subcommand_rejected(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2

    def test_bad_value_reports_key(self, tmp_path, capsys):
        rc = main(["table1", "--out", str(tmp_path), "--n_max", "2.5"])
        assert rc == 1
        assert "n_max" in capsys.readouterr().err

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nope = 3\n")
        rc = main(["table1", "--out", str(tmp_path), "--config", str(cfg)])
        assert rc == 1
        assert "unknown key" in capsys.readouterr().err


class TestTable1:
    def test_full_defaults(self, tmp_path):
        rc = main(["table1", "--out", str(tmp_path), "--threads", "1"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "table1.csv")
        assert header == ["n", "t", "sigma", "reference", "rel_error"]
        assert len(rows) == 20
        worst = max(float(row[4]) for row in rows)
        assert worst < 1e-8
        doc = read_manifest(tmp_path, "table1")
        assert doc["passed"] is True
        assert doc["results"]["compared_cells"] == 20
        assert doc["gates"]["max_rel_error"] == 1e-8

    def test_reruns_bit_identical(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            assert main(["table1", "--out", str(out), "--threads", "2",
                         "--n_max", "3"]) == 0
        for name in ("table1.csv", "table1_manifest.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_gate_failure_sets_exit_code(self, tmp_path):
        rc = main(["table1", "--out", str(tmp_path), "--n_max", "2",
                   "--gate", "1e-30"])
        assert rc == 1
        assert read_manifest(tmp_path, "table1")["passed"] is False

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment line\nn_max = 4\ngate = 1e-7\n")
        rc = main(["table1", "--out", str(tmp_path), "--config", str(cfg),
                   "--gate", "1e-6"])
        assert rc == 0
        doc = read_manifest(tmp_path, "table1")
        assert doc["config"]["n_max"] == 4
        assert doc["config"]["gate"] == 1e-6

    def test_off_table_parameters_skip_comparison(self, tmp_path):
        rc = main(["table1", "--out", str(tmp_path), "--b", "2.5",
                   "--n_max", "2"])
        assert rc == 0
        doc = read_manifest(tmp_path, "table1")
        assert doc["results"]["compared_cells"] == 0
        _, rows = read_csv(tmp_path / "table1.csv")
        assert all(row[3] == "" and row[4] == "" for row in rows)

    def test_output_directory_created(self, tmp_path):
        out = tmp_path / "deep" / "nested"
        assert main(["table1", "--out", str(out), "--n_max", "2"]) == 0
        assert (out / "table1.csv").exists()

    def test_thread_cap_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NRBK_MAX_THREADS", "1")
        assert main(["table1", "--out", str(tmp_path), "--threads", "8",
                     "--n_max", "2"]) == 0
        assert read_manifest(tmp_path, "table1")["threads"] == 1


class TestZeros:
    def test_csv_schema_and_conjugacy(self, tmp_path):
        rc = main(["zeros", "--out", str(tmp_path), "--kinds", "half",
                   "--n_min", "1", "--n_max", "4"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "zeros.csv")
        assert header == ["order_kind", "n", "j", "re", "im", "residual"]
        assert len(rows) == 1 + 2 + 3 + 4
        points = {(row[1], float(row[4])) for row in rows}
        assert all((row[1], -float(row[4])) in points for row in rows)
        assert all(float(row[5]) < 1e-12 for row in rows)
        assert all(float(row[3]) < 0.0 for row in rows)

    def test_gate_scale_relaxes(self, tmp_path):
        base = ["zeros", "--kinds", "integer", "--n_min", "2", "--n_max",
                "3", "--gate", "1e-30"]
        assert main(base + ["--out", str(tmp_path / "tight")]) == 1
        assert main(base + ["--out", str(tmp_path / "loose"),
                            "--gate-scale", "1e20"]) == 0

    def test_bad_kind_rejected(self, tmp_path, capsys):
        rc = main(["zeros", "--out", str(tmp_path), "--kinds", "wrong"])
        assert rc == 1
        assert "kinds" in capsys.readouterr().err


class TestWnProfile:
    def test_density_against_asymptotic(self, tmp_path):
        rc = main(["wn-profile", "--out", str(tmp_path), "--modes", "12",
                   "--points", "9"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "wn_profile.csv")
        assert header == ["n", "kappa", "r", "w", "w_asymptotic", "rel_diff"]
        assert len(rows) == 9
        assert all(float(row[3]) > 0.0 for row in rows)
        doc = read_manifest(tmp_path, "wn_profile")
        assert doc["results"]["peak_rel_diff"] < 0.05


class TestNrbcAccuracy:
    def test_quick_case(self, tmp_path):
        rc = main(["nrbc-accuracy", "--out", str(tmp_path), "--modes", "6",
                   "--omegas", "31.415926535897931", "--radii", "2.5",
                   "--times", "0.5,1.0", "--grid", "64", "--threads", "2"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "nrbc_accuracy.csv")
        assert header == ["t", "b", "omega", "E1", "E2"]
        assert len(rows) == 2
        assert all(float(row[4]) <= 1e-9 for row in rows)
        assert all(float(row[3]) <= float(row[4]) for row in rows)

    def test_mismatched_case_lists_rejected(self, tmp_path, capsys):
        rc = main(["nrbc-accuracy", "--out", str(tmp_path),
                   "--omegas", "10.0,20.0", "--radii", "2.5"])
        assert rc == 1
        assert "pair up" in capsys.readouterr().err


class TestTimeConvergence:
    def test_orders_near_two(self, tmp_path):
        rc = main(["time-convergence", "--out", str(tmp_path),
                   "--modes", "5", "--degree", "24",
                   "--dt_list", "2e-3,1e-3", "--times", "0.5",
                   "--threads", "2"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "time_convergence.csv")
        assert header == ["t", "dt", "l2_error", "l2_order", "max_error",
                          "max_order"]
        assert len(rows) == 2
        assert rows[0][3] == ""
        assert 1.95 <= float(rows[1][3]) <= 2.05
        doc = read_manifest(tmp_path, "time_convergence")
        assert doc["results"]["orders_checked"] == 2

    def test_single_step_run_has_no_order_column(self, tmp_path):
        rc = main(["time-convergence", "--out", str(tmp_path),
                   "--modes", "4", "--degree", "20", "--dt_list", "1e-3",
                   "--times", "0.5"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "time_convergence.csv")
        assert header == ["t", "dt", "l2_error", "max_error"]
        assert len(rows) == 1
        doc = read_manifest(tmp_path, "time_convergence")
        assert doc["results"]["orders_checked"] == 0


class TestSpaceConvergence:
    def test_errors_decay_with_degree(self, tmp_path):
        # the coarse dt keeps this quick; the tight drop/top gates are
        # scaled away so the run checks machinery, not the physics
        rc = main(["space-convergence", "--out", str(tmp_path),
                   "--modes", "6", "--degrees", "8,16,32",
                   "--dt", "5e-4", "--times", "1.0", "--threads", "2",
                   "--gate-scale", "1e6"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "space_convergence.csv")
        assert header == ["t", "degree", "l2_error", "max_error"]
        assert len(rows) == 3
        errors = [float(row[2]) for row in rows]
        assert errors[0] > errors[1] >= errors[2] * 0.5
        doc = read_manifest(tmp_path, "space_convergence")
        for name in ("coarse_to_fine_drop", "finest_below_gate",
                     "errors_decay_with_degree"):
            assert name in doc["checks"]


class TestSimulate:
    def test_snapshots_and_trace(self, tmp_path):
        rc = main(["simulate", "--out", str(tmp_path), "--modes", "8",
                   "--degree", "16", "--omega", "3.141592653589793",
                   "--times", "0.0,0.25,0.5", "--radial_points", "7",
                   "--angle_points", "8", "--grid", "64", "--threads", "1"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "simulate_field.csv")
        assert header == ["t", "r", "phi", "U_exact", "U_num"]
        assert len(rows) == 3 * 7 * 8
        start = [row for row in rows if float(row[0]) == 0.0]
        assert all(float(row[3]) == 0.0 and float(row[4]) == 0.0
                   for row in start)
        # ahead of the front the exact field vanishes identically
        for row in rows:
            if float(row[1]) > 2.0 + 5.0 * float(row[0]):
                assert float(row[3]) == 0.0
        header, trace = read_csv(tmp_path / "simulate_boundary.csv")
        assert header == ["t", "U"]
        assert len(trace) == 501
        assert float(trace[0][1]) == 0.0
        doc = read_manifest(tmp_path, "simulate")
        assert doc["passed"] is True
        assert doc["results"]["max_field_error"] \
            <= 1e-2 * doc["results"]["peak_field"]


class TestConvBench:
    def test_quick_benchmark(self, tmp_path):
        rc = main(["conv-bench", "--out", str(tmp_path), "--modes", "0,3",
                   "--dims", "2", "--steps_list", "500,2000",
                   "--gate-scale", "5"])
        assert rc == 0
        header, rows = read_csv(tmp_path / "conv_bench.csv")
        assert header == ["dim", "n", "steps", "recursive_seconds",
                          "recursive_per_step", "direct_seconds",
                          "direct_per_step", "deviation"]
        assert len(rows) == 4
        doc = read_manifest(tmp_path, "conv_bench")
        assert doc["results"]["max_deviation"] < 1e-10

    def test_methods_agree_exactly(self):
        kernel = build_kernel(KernelParams(dim=2, n=3, radius=3.0, speed=5.0))
        dt = 1e-3
        grid = np.arange(501) * dt
        signal = np.sin(2.0 * grid) + 0.25 * np.cos(5.0 * grid)
        bench = benchmark_convolution(kernel, signal, dt)
        assert bench["deviation"] < 1e-12
        assert bench["recursive"].shape == bench["direct"].shape == (501,)

    def test_sigma_samples_match_pointwise(self):
        kernel = build_kernel(KernelParams(dim=2, n=2, radius=3.0, speed=5.0))
        times = np.array([0.0, 0.1, 0.5, 2.0])
        values = sigma_samples(kernel, times)
        for t, value in zip(times, values):
            exact = eval_sigma(kernel, float(t))
            assert abs(value - exact) <= 1e-14 * max(1.0, abs(exact))

    def test_spherical_monopole_has_no_tail(self):
        kernel = build_kernel(KernelParams(dim=3, n=0, radius=3.0, speed=5.0))
        grid = np.arange(101) * 1e-2
        signal = np.sin(grid)
        out = recursive_convolution(kernel, signal, 1e-2)
        assert np.max(np.abs(out)) == 0.0
        direct = direct_convolution(sigma_samples(kernel, grid), signal, 1e-2)
        assert np.max(np.abs(direct)) == 0.0


class TestProgrammaticEntry:
    def test_run_experiment_with_tuple_override(self, tmp_path):
        report = run_experiment("table1", out_dir=str(tmp_path), threads=1,
                                n_max=2, times=(0.1, 2.0))
        assert report["passed"] is True
        assert report["results"]["compared_cells"] == 6
        assert (tmp_path / "table1_manifest.json").exists()

    def test_unknown_experiment_rejected(self, tmp_path):
        from nrbk.errors import ConfigurationError
        with pytest.raises(ConfigurationError):
            run_experiment("mystery", out_dir=str(tmp_path))

    def test_bad_gate_scale_rejected(self, tmp_path):
        from nrbk.errors import ConfigurationError
        with pytest.raises(ConfigurationError):
            run_experiment("table1", out_dir=str(tmp_path), gate_scale=0.0)
