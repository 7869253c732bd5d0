"""Harness: config parsing, CLI commands, output files, figures."""

import json
from pathlib import Path

import numpy as np
import pytest

from orthosample.cli import main
from orthosample.ensemble import ParticleEnsemble
from orthosample.errors import ConfigError, DimensionMismatch
from orthosample.experiment import (
    initial_ensemble,
    load_config,
    parse_config,
    run_experiment,
)
from orthosample.targets import synthetic_constraint
from orthosample.verify import CheckResult, verify_suite

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIGS = REPO_ROOT / "configs"


def make_config(tmp_path, **overrides):
    doc = {
        "version": 1,
        "target": "synthetic",
        "init": {"kind": "on_manifold"},
        "sampler": {
            "method": "o_langevin",
            "eta": 0.01,
            "alpha": 100.0,
            "beta": 0.0,
            "n_particles": 10,
            "n_iters": 50,
            "seed": 5,
            "record_every": 10,
        },
        "ground_truth_n": 200,
        "output_dir": str(tmp_path / "out"),
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(doc.get(key), dict):
            doc[key].update(value)
        else:
            doc[key] = value
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


class TestConfigParsing:
    def test_round_trip(self, tmp_path):
        cfg = load_config(make_config(tmp_path))
        assert cfg.sampler.method == "o_langevin"
        assert cfg.sampler.psi.alpha == 100.0
        assert cfg.init.kind == "on_manifold"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)

    def test_bad_method(self, tmp_path):
        with pytest.raises(ConfigError, match="method"):
            load_config(make_config(tmp_path, sampler={"method": "hmc"}))

    def test_version_mismatch(self, tmp_path):
        with pytest.raises(ConfigError, match="version"):
            load_config(make_config(tmp_path, version=99))

    def test_ground_truth_floor(self, tmp_path):
        with pytest.raises(ConfigError, match="ground_truth_n"):
            load_config(make_config(tmp_path, ground_truth_n=10))

    def test_bad_init_kind(self):
        with pytest.raises(ConfigError, match="init.kind"):
            parse_config({
                "version": 1,
                "init": {"kind": "somewhere"},
                "sampler": {"method": "langevin", "eta": 0.1, "n_iters": 10},
                "output_dir": "out",
            })

    def test_relative_output_dir_resolves_next_to_config(self, tmp_path):
        cfg = load_config(make_config(tmp_path, output_dir="runs/here"))
        assert cfg.output_dir == tmp_path / "runs" / "here"


class TestInitialEnsemble:
    def test_on_manifold(self, tmp_path):
        cfg = load_config(make_config(tmp_path))
        ens = initial_ensemble(cfg)
        c = synthetic_constraint()
        assert np.abs(c.values(ens.points)).max() <= 1e-12
        assert ens.n == cfg.sampler.n_particles

    def test_off_manifold_cloud(self, tmp_path):
        cfg = load_config(make_config(
            tmp_path, init={"kind": "off_manifold", "center": [1.5, 1.5], "scale": 0.1}
        ))
        ens = initial_ensemble(cfg)
        np.testing.assert_allclose(ens.points.mean(axis=0), [1.5, 1.5], atol=0.2)


class TestRunCommand:
    def test_missing_config_exits_2(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.json")]) == 2
        assert "not found" in capsys.readouterr().err

    def test_produces_artifacts(self, tmp_path, capsys):
        path = make_config(tmp_path)
        assert main(["run", str(path)]) == 0
        out = tmp_path / "out"
        assert (out / "samples.csv").exists()
        assert (out / "metrics.csv").exists()
        assert (out / "run.json").exists()
        summary = json.loads(capsys.readouterr().out.splitlines()[0])
        assert "final_metrics" in summary
        meta = json.loads((out / "run.json").read_text())
        for key in ("method", "eta", "alpha", "beta", "n_particles", "n_iters",
                    "seed", "rng_algorithm", "wall_time_s", "metric_series"):
            assert key in meta
        # metrics.csv rows align with the recording schedule
        rows = (out / "metrics.csv").read_text().strip().splitlines()
        assert rows[0] == "iteration,metric,value"
        iters = [int(r.split(",")[0]) for r in rows[1:]]
        assert iters == [0, 10, 20, 30, 40, 50]

    def test_repeated_runs_byte_identical(self, tmp_path):
        path_a = make_config(tmp_path, output_dir=str(tmp_path / "a"))
        assert main(["run", str(path_a)]) == 0
        path_b = make_config(tmp_path, output_dir=str(tmp_path / "b"))
        assert main(["run", str(path_b)]) == 0
        assert (tmp_path / "a" / "samples.csv").read_bytes() == (tmp_path / "b" / "samples.csv").read_bytes()
        assert (tmp_path / "a" / "metrics.csv").read_bytes() == (tmp_path / "b" / "metrics.csv").read_bytes()

    def test_divergent_run_exits_3_with_iteration(self, tmp_path, capsys):
        path = make_config(tmp_path, sampler={"method": "langevin", "eta": 0.5,
                                              "n_particles": 20, "n_iters": 2000})
        assert main(["run", str(path)]) == 3
        assert "iteration" in capsys.readouterr().err

    def test_unstable_config_exits_2(self, tmp_path, capsys):
        path = make_config(tmp_path, sampler={"method": "o_svgd", "eta": 0.5, "alpha": 100.0})
        assert main(["run", str(path)]) == 2
        assert "eta*alpha" in capsys.readouterr().err

    def test_bundled_default_config(self, tmp_path, capsys):
        # the checked-in O-Langevin reproduction config: paper step size and
        # drift gain, on-manifold start
        doc = json.loads((CONFIGS / "olangevin_on.json").read_text())
        doc["output_dir"] = str(tmp_path / "run")
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        assert main(["run", str(path)]) == 0
        summary = json.loads(capsys.readouterr().out.splitlines()[0])
        assert summary["final_metrics"]["mae_g"] < 0.05


class TestMetricsCommand:
    def test_self_comparison(self, tmp_path, capsys):
        out = tmp_path / "gt.csv"
        assert main(["groundtruth", "--n", "500", "--seed", "3", "--out", str(out)]) == 0
        assert main(["metrics", str(out), str(out), "--constraint", "synthetic"]) == 0
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert report["energy_distance"] == pytest.approx(0.0, abs=1e-12)
        assert report["mae_a"] <= 1e-12

    def test_split_halves_baseline(self, tmp_path, capsys):
        full = tmp_path / "full.csv"
        main(["groundtruth", "--n", "2000", "--seed", "4", "--out", str(full)])
        ens = ParticleEnsemble.read_csv(full)
        ParticleEnsemble(points=ens.points[:1000]).write_csv(tmp_path / "a.csv")
        ParticleEnsemble(points=ens.points[1000:]).write_csv(tmp_path / "b.csv")
        assert main(["metrics", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == 0
        report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert 0.0 < report["energy_distance"] < 0.1

    def test_dimension_mismatch_exits_2(self, tmp_path, capsys):
        (tmp_path / "a.csv").write_text("x0,x1\n0,0\n")
        (tmp_path / "b.csv").write_text("x0,x1,x2\n0,0,0\n")
        assert main(["metrics", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == 2

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["metrics", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == 2


class TestGroundtruthCommand:
    def test_writes_manifold_samples(self, tmp_path):
        out = tmp_path / "gt.csv"
        assert main(["groundtruth", "--n", "5", "--seed", "9", "--out", str(out)]) == 0
        ens = ParticleEnsemble.read_csv(out)
        assert ens.n == 5
        g = ens.points[:, 0] + ens.points[:, 1] ** 3
        assert np.abs(g).max() <= 1e-12

    def test_repeatable(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["groundtruth", "--n", "50", "--seed", "12", "--out", str(a)])
        main(["groundtruth", "--n", "50", "--seed", "12", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_unwritable_path_exits_2(self, tmp_path, capsys):
        target = tmp_path / "gt.csv"
        target.mkdir()  # a directory at the destination makes the write fail
        assert main(["groundtruth", "--n", "5", "--seed", "1", "--out", str(target)]) == 2

    def test_rejects_nonpositive_n(self, capsys):
        assert main(["groundtruth", "--n", "0", "--seed", "1", "--out", "x.csv"]) == 2


class TestVerifyCommand:
    def test_clean_build_passes(self, capsys):
        assert main(["verify"]) == 0
        out = capsys.readouterr().out
        assert "divergence_identity" in out
        assert "FAIL" not in out

    def test_fault_injection_flags_divergence_identity(self):
        results = verify_suite(fault="negate_correction", n_points=100, n_fd_points=20)
        by_name = {r.name: r for r in results}
        assert not by_name["divergence_identity"].passed
        assert by_name["projector_idempotent"].passed

    def test_singular_point_reported_not_crashed(self):
        from orthosample.geometry import sphere_constraint

        results = verify_suite(
            constraint=sphere_constraint(2), n_points=50, n_fd_points=10,
            extra_points=np.array([[0.0, 0.0]]),
        )
        by_name = {r.name: r for r in results}
        assert "no_singular_gradients" in by_name
        assert "SingularGradient" in by_name["no_singular_gradients"].detail

    def test_failures_exit_1(self, capsys, monkeypatch):
        import orthosample.cli as cli_module

        monkeypatch.setattr(
            cli_module, "verify_suite",
            lambda: [CheckResult("divergence_identity", 1.0, 1e-8, False)],
        )
        assert main(["verify"]) == 1
        assert "divergence_identity" in capsys.readouterr().out


class TestReportCommand:
    def test_renders_figures(self, tmp_path):
        path = make_config(tmp_path)
        assert main(["run", str(path)]) == 0
        assert main(["report", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "samples.png").stat().st_size > 0
        assert (tmp_path / "out" / "metrics.png").stat().st_size > 0

    def test_run_with_figures_flag(self, tmp_path):
        path = make_config(tmp_path, output_dir=str(tmp_path / "figrun"))
        assert main(["run", str(path), "--figures"]) == 0
        assert (tmp_path / "figrun" / "samples.png").exists()

    def test_missing_run_dir_exits_2(self, tmp_path):
        assert main(["report", str(tmp_path / "nothing")]) == 2


class TestEnsembleCsv:
    def test_round_trip(self, tmp_path):
        pts = np.random.default_rng(105).standard_normal((17, 3))
        path = tmp_path / "pts.csv"
        ParticleEnsemble(points=pts).write_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "x0,x1,x2"
        back = ParticleEnsemble.read_csv(path)
        np.testing.assert_array_equal(back.points, pts)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            ParticleEnsemble(points=np.array([[np.nan, 0.0]]))

    def test_rejects_ragged_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("foo,bar\n0,1\n")
        with pytest.raises(DimensionMismatch):
            ParticleEnsemble.read_csv(path)


def test_experiment_metadata_records_resolved_config(tmp_path):
    cfg = load_config(make_config(tmp_path))
    record, paths = run_experiment(cfg)
    meta = json.loads(paths["run"].read_text())
    assert meta["rng_algorithm"] == "numpy.random.PCG64"
    assert meta["init"]["kind"] == "on_manifold"
    assert meta["metric_series"][-1][0] == cfg.sampler.n_iters
