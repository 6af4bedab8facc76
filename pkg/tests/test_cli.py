"""CLI subcommands, run artifacts, sweeps, and exit codes."""

import json

import pytest

from vortexlab.cli import main
from vortexlab.config import ExperimentConfig
from vortexlab.diagnostics import CSV_HEADER
from vortexlab.experiments import run_experiment, run_sweep, summarize_sweep

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def single_vortex_config(**solver_extra):
    solver = {"nu": 1e-3, "t_end": 0.06, "diag_times": [0.0, 0.03, 0.06]}
    solver.update(solver_extra)
    return {
        "grid": {"L": 10.0, "n": 64},
        "solver": solver,
        "layout": [{"center": [5.0, 5.0], "eps": 0.5, "a": 1.0}],
        "metrics": {"R": [1.0]},
    }


class TestRunCommand:
    def test_minimal_run_produces_all_artifacts(self, tmp_path):
        cfg = write_config(tmp_path, single_vortex_config())
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        for name in ("diagnostics.csv", "pv.csv", "assumptions.json", "manifest.json"):
            assert (out / name).exists()
        # single vortex: the paired point stays put
        pv_lines = (out / "pv.csv").read_text().strip().split("\n")
        assert pv_lines[0] == "t,i,Y_x,Y_y,H,P_x,P_y,I"
        positions = {tuple(line.split(",")[2:4]) for line in pv_lines[1:]}
        assert len(positions) == 1
        # diagnostics header matches the documented schema
        diag_lines = (out / "diagnostics.csv").read_text().split("\n")
        assert diag_lines[0] == CSV_HEADER
        assert len(diag_lines) == 1 + 3 + 1  # header + 3 records + trailing newline

    def test_identical_configs_give_identical_csv_bytes(self, tmp_path):
        cfg = write_config(tmp_path, single_vortex_config())
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["run", "--config", str(cfg), "--out", str(out2)]) == 0
        assert (out1 / "diagnostics.csv").read_bytes() == (out2 / "diagnostics.csv").read_bytes()
        assert (out1 / "pv.csv").read_bytes() == (out2 / "pv.csv").read_bytes()

    def test_manifest_echoes_config(self, tmp_path):
        data = single_vortex_config()
        cfg = write_config(tmp_path, data)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["grid"] == data["grid"]
        assert "wall_time_s" in manifest and "versions" in manifest
        assert manifest["aborted"] is False

    def test_snapshots_written_when_enabled(self, tmp_path):
        data = single_vortex_config(snapshot_times=[0.0, 0.06])
        data["output"] = {"snapshots": True}
        cfg = write_config(tmp_path, data)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out)])
        assert (out / "snapshot_0000_c0.vrtx").exists()
        assert (out / "snapshot_0001_c0.vrtx").exists()

    def test_bad_config_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, {"grid": {"L": 10.0, "n": 63}})
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_sign_guard_abort_exits_3_with_partial_output(self, tmp_path):
        data = single_vortex_config(sign_abort_tol=1e-18)
        cfg = write_config(tmp_path, data)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 3
        assert (out / "diagnostics.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["aborted"] is True
        assert "sign violation" in manifest["abort_reason"]


class TestPvCommand:
    def test_pv_only_run(self, tmp_path):
        data = {
            "grid": {"L": 10.0, "n": 64},
            "solver": {"nu": 0.0, "t_end": 1.0, "diag_times": [0.0, 0.5, 1.0]},
            "layout": [
                {"center": [4.5, 5.0], "eps": 0.01, "a": 1.0},
                {"center": [5.5, 5.0], "eps": 0.01, "a": 1.0},
            ],
        }
        cfg = write_config(tmp_path, data)
        out = tmp_path / "pvout"
        assert main(["pv", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "pv.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 3 * 2

    def test_collision_abort_exits_3(self, tmp_path):
        data = {
            "grid": {"L": 10.0, "n": 64},
            "solver": {"nu": 0.0, "t_end": 1.0, "diag_times": [0.0, 1.0]},
            "layout": [
                {"center": [4.9, 5.0], "eps": 0.01, "a": 1.0},
                {"center": [5.1, 5.0], "eps": 0.01, "a": 1.0},
            ],
            "pv": {"dt": 1e-3, "collision_floor": 0.5},
        }
        cfg = write_config(tmp_path, data)
        assert main(["pv", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


class TestCheckTheoryCommand:
    def test_passes(self, capsys):
        assert main(["check-theory"]) == 0
        out = capsys.readouterr().out
        assert "min slack" in out
        assert "passed" in out

    def test_violation_exits_4(self, monkeypatch, capsys):
        from vortexlab.theory_checks import SlackRecord, TheoryReport

        fake = TheoryReport(
            truncated_exponential=SlackRecord(slack=-1e-3, at={"M": 2, "s": 1.0}),
            falling_factorial=SlackRecord(slack=0.5, at={"M": 1, "m": 1}),
            passed=False,
        )
        monkeypatch.setattr("vortexlab.cli.run_checks", lambda: fake)
        assert main(["check-theory"]) == 4
        assert "FAILED" in capsys.readouterr().err


class TestLambOseenCommand:
    def test_zero_horizon_reports_zero_errors(self, capsys):
        code = main(["lamb-oseen", "--nu", "1e-3", "--n", "64", "--L", "10",
                     "--t0", "1.0", "--t-end", "1.0"])
        assert code == 0
        out = capsys.readouterr().out
        assert "max relative L2 field error:      0.000000e+00" in out

    def test_short_evolution_runs(self, capsys):
        code = main(["lamb-oseen", "--nu", "5e-3", "--n", "64", "--L", "10",
                     "--t0", "1.0", "--t-end", "1.2"])
        assert code == 0
        assert "moment-law" in capsys.readouterr().out

    def test_halving_h_at_least_squares_the_field_error(self):
        from vortexlab.experiments import validate_lamb_oseen

        errs = {}
        for n in (64, 128):
            rep = validate_lamb_oseen(nu=1e-2, n=n, L=10.0, t0=1.0, t_end=1.5, records=3)
            errs[n] = rep["max_rel_l2_error"]
        assert errs[128] <= errs[64] ** 2


class TestSweep:
    def sweep_config(self, jobs=1):
        data = single_vortex_config()
        data["sweep"] = {"eps": [0.5], "nu": [1e-3], "jobs": jobs}
        return data

    def test_degenerate_sweep_matches_single_run(self, tmp_path):
        data = self.sweep_config()
        cfg_path = write_config(tmp_path, data)
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
        summary = (out / "summary.csv").read_text().strip().split("\n")
        assert summary[0] == "eps,nu,t,i,W2,W2_about_Y,distXY,w1_contrib,w1_bound,status"
        assert len(summary) == 1 + 3  # one pair, three sample times

        ref = run_experiment(ExperimentConfig.from_dict(single_vortex_config()),
                             tmp_path / "ref")
        run_csv = (out / "run_000_eps0.5_nu0.001" / "diagnostics.csv").read_text()
        assert run_csv == (tmp_path / "ref" / "diagnostics.csv").read_text()
        # summary W2 column reproduces the per-run diagnostics value
        w2_summary = [line.split(",")[4] for line in summary[1:]]
        w2_run = [line.split(",")[5] for line in run_csv.strip().split("\n")[1:]]
        assert w2_summary == w2_run

    def test_summarizer_is_reproducible_byte_for_byte(self, tmp_path):
        cfg = ExperimentConfig.from_dict(self.sweep_config())
        out = tmp_path / "sweep"
        run_sweep(cfg, out)
        first = (out / "summary.csv").read_bytes(), (out / "rates.json").read_bytes()
        summarize_sweep(out)
        second = (out / "summary.csv").read_bytes(), (out / "rates.json").read_bytes()
        assert first == second

    def test_failed_member_recorded_and_sweep_continues(self, tmp_path):
        data = self.sweep_config()
        data["sweep"]["eps"] = [0.5, 9.0]  # second blob cannot fit the box
        cfg = ExperimentConfig.from_dict(data)
        out = tmp_path / "sweep"
        run_sweep(cfg, out)
        rows = (out / "summary.csv").read_text().strip().split("\n")[1:]
        statuses = {row.split(",")[-1] for row in rows}
        assert statuses == {"ok", "error"}
        manifest = json.loads((out / "sweep_manifest.json").read_text())
        failed = [e for e in manifest["runs"] if e["status"] == "error"]
        assert len(failed) == 1 and "boundary" in failed[0]["error"]

    def test_env_var_overrides_jobs(self, tmp_path, monkeypatch):
        monkeypatch.setenv("VORTEXLAB_JOBS", "2")
        data = self.sweep_config(jobs=1)
        data["sweep"]["eps"] = [0.4, 0.5]
        cfg_path = write_config(tmp_path, data)
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
        manifest = json.loads((out / "sweep_manifest.json").read_text())
        assert all(entry["status"] == "ok" for entry in manifest["runs"])

    @pytest.mark.slow
    def test_nu_scaling_exponent_for_near_delta_vortex(self, tmp_path):
        # exact law W2^2 = W2(0)^2 + 4 nu t for a single radial component: a
        # near-delta initial blob makes the floor negligible against 4 nu t,
        # so the fitted nu-exponent of W2 at fixed t approaches 1/2
        data = {
            "grid": {"L": 2.0, "n": 256},
            "solver": {"nu": 1e-3, "t_end": 1.25, "diag_times": [0.0, 1.25],
                       "sign_abort_tol": None},
            "layout": [{"center": [1.0, 1.0], "eps": 0.004, "a": 1.0}],
            "sweep": {"eps": [0.004], "nu": [1e-4, 1e-3, 1e-2]},
        }
        out = tmp_path / "sweep"
        run_sweep(ExperimentConfig.from_dict(data), out)
        rates = json.loads((out / "rates.json").read_text())
        final = [r for r in rates if r["t"] == 1.25][0]
        assert final["w2_vs_nu"] is not None
        assert abs(final["w2_vs_nu"]["exponent"] - 0.5) <= 0.01

    def test_eps_scaling_exponent_at_tiny_viscosity(self, tmp_path):
        # exact law W2^2 = eps^2 + 4 nu t: with nu t << eps^2 the fitted
        # eps-exponent of W2 is 1
        data = {
            "grid": {"L": 6.0, "n": 256},
            "solver": {"nu": 1e-6, "t_end": 0.05, "diag_times": [0.0, 0.05]},
            "layout": [{"center": [3.0, 3.0], "eps": 0.2, "a": 1.0}],
            "sweep": {"eps": [0.1, 0.2, 0.4], "nu": [1e-6]},
        }
        out = tmp_path / "sweep"
        run_sweep(ExperimentConfig.from_dict(data), out)
        rates = json.loads((out / "rates.json").read_text())
        final = [r for r in rates if r["t"] == 0.05][0]
        assert final["w2_vs_eps"] is not None
        assert abs(final["w2_vs_eps"]["exponent"] - 1.0) <= 0.05
