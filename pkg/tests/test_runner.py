import json
import subprocess
import sys

import numpy as np
import pytest

from spingas.cli import main as cli_main
from spingas.runner import (ExperimentSpec, SpecError, oracle_check, run,
                            series_csv)

BOLTZ_CONFIG = {"density": 1.0, "temperature": 1.0, "mass": 1.0,
                "diameter": 1.0, "gamma": 1.0, "n_particles": 12,
                "phase_mode": "random"}


def boltz_spec(**kw):
    base = dict(model="boltzmann", config=dict(BOLTZ_CONFIG), t_max=0.08,
                n_samples=4, ensemble=8, seed=3,
                observables=[{"name": "mean_single_entropy"}])
    base.update(kw)
    return ExperimentSpec.from_dict(base)


def _spec_dict(spec):
    d = dict(spec.__dict__)
    d.update(d.pop("extras"))
    return d


class TestSpec:
    def test_missing_fields_named(self):
        with pytest.raises(SpecError, match="model"):
            ExperimentSpec.from_dict({"config": {}})
        with pytest.raises(SpecError, match="config"):
            ExperimentSpec.from_dict({"model": "boltzmann"})

    def test_bad_values_named(self):
        with pytest.raises(SpecError, match="kind"):
            boltz_spec(kind="dance")
        with pytest.raises(SpecError, match="ensemble"):
            boltz_spec(ensemble=0)
        with pytest.raises(SpecError, match="observables"):
            boltz_spec(observables=[{"size": 2}])

    def test_unknown_observable_for_model(self):
        spec = boltz_spec(observables=[{"name": "probe_entropy"}])
        with pytest.raises(SpecError, match="observable"):
            run(spec)

    def test_hash_stable_under_runtime_fields(self):
        a = boltz_spec()
        b = boltz_spec(workers=4)
        assert a.spec_hash() == b.spec_hash()
        c = boltz_spec(seed=4)
        assert a.spec_hash() != c.spec_hash()


class TestDeterminism:
    def test_identical_bytes(self):
        r1 = run(boltz_spec())
        r2 = run(boltz_spec())
        assert series_csv(r1) == series_csv(r2)

    def test_seed_changes_noise_not_grid(self):
        r1 = run(boltz_spec(seed=1))
        r2 = run(boltz_spec(seed=2))
        s1, s2 = r1.series[0], r2.series[0]
        assert np.array_equal(s1.times, s2.times)
        assert not np.array_equal(s1.mean, s2.mean)

    def test_workers_match_serial(self):
        serial = run(boltz_spec(ensemble=6, workers=1))
        parallel = run(boltz_spec(ensemble=6, workers=2))
        assert series_csv(serial) == series_csv(parallel)

    def test_stderr_shrinks_with_ensemble(self):
        small = run(boltz_spec(ensemble=64, seed=11))
        large = run(boltz_spec(ensemble=256, seed=11))
        ratio = large.series[0].stderr[-1] / small.series[0].stderr[-1]
        assert 0.3 < ratio < 0.75  # expect ~ 1/2 from 4x the samples

    def test_lattice_concurrence_and_epsilon_observables(self):
        spec = ExperimentSpec.from_dict({
            "model": "lattice", "t_max": 2.0, "n_samples": 4, "ensemble": 6,
            "seed": 2,
            "config": {"dims": [10, 10], "n_particles": 40, "hop_rate": 1.0,
                       "coupling": 0.8, "dt": 0.1,
                       "probes": {"positions": [[5, 5], [5, 5]],
                                  "mode": "hopping", "hop_rate": 0.0}},
            "observables": [{"name": "concurrence", "state": "psi_plus"},
                            {"name": "concurrence", "state": "phi_plus"},
                            {"name": "epsilon_stats", "z": [1, 1]}]})
        res = run(spec)
        by_name = {s.name: s for s in res.series}
        # co-located pinned probes: psi+ is protected exactly
        assert np.allclose(by_name["concurrence[psi_plus]"].mean, 1.0,
                           atol=1e-9)
        assert by_name["concurrence[phi_plus]"].mean[-1] < 1.0
        eps = by_name["epsilon_width(1, 1)"]
        assert eps.mean[0] == 0.0 and np.all(np.diff(eps.mean) >= -1e-12)

    def test_trivial_lattice_run_is_zero(self):
        spec = ExperimentSpec.from_dict({
            "model": "lattice", "t_max": 1.0, "n_samples": 4, "ensemble": 3,
            "seed": 0,
            "config": {"dims": [5, 5], "n_particles": 1, "hop_rate": 0.0,
                       "coupling": 0.8, "dt": 0.1},
            "observables": [{"name": "block_entropy", "size": 1}]})
        res = run(spec)
        assert np.all(res.series[0].mean == 0.0)


class TestEmission:
    def test_outputs_written(self, tmp_path):
        spec = boltz_spec(output=str(tmp_path / "out"))
        run(spec)
        csv_text = (tmp_path / "out" / "results.csv").read_text()
        assert csv_text.startswith("# spingas-series schema=1")
        assert "mean_single_entropy" in csv_text
        blob = json.loads((tmp_path / "out" / "results.json").read_text())
        assert blob["metadata"]["distance_metric"] == "manhattan_periodic"
        assert blob["series"][0]["n"] == 8

    def test_snapshot_checkpoint(self, tmp_path):
        from spingas import InteractionGraph
        spec = boltz_spec(output=str(tmp_path / "out"))
        spec = ExperimentSpec.from_dict({**_spec_dict(spec), "snapshot": True})
        run(spec)
        g = InteractionGraph.load_json(tmp_path / "out" /
                                       "graph_snapshot.json")
        assert g.n == 12

    def test_rows_csv_for_survey(self):
        spec = ExperimentSpec.from_dict({
            "model": "boltzmann", "kind": "equilibrium_survey",
            "t_max": 1.0, "ensemble": 12, "seed": 5, "n": 6, "max_size": 2,
            "config": dict(BOLTZ_CONFIG)})
        res = run(spec)
        assert len(res.rows) == 2
        assert all(row["pass"] for row in res.rows)
        text = series_csv(res)
        assert "bound_min" in text.splitlines()[1]


class TestOracleCheck:
    def test_passes(self):
        ok, lines = oracle_check(n_max=7, trials=30, seed=1)
        assert ok and lines[-1] == "PASS"


class TestCli:
    def test_analytic_eq7(self, capsys):
        assert cli_main(["analytic", "--eq", "7", "--N", "50", "--NA", "1",
                         "--rt", "0.1"]) == 0
        out = capsys.readouterr().out.strip()
        assert out == "0.0557305"

    def test_analytic_alpha(self, capsys):
        assert cli_main(["analytic", "--eq", "alpha", "--gamma", "0.1",
                         "--NA", "1", "--N", "20"]) == 0
        out = capsys.readouterr().out
        assert "closed" in out and "quadrature" in out

    def test_oracle_check_exit_code(self, capsys):
        assert cli_main(["oracle-check", "--n", "6", "--trials", "10"]) == 0

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli_main(["boltzmann", "--frobnicate"])
        assert exc.value.code == 2

    def test_missing_recipe_is_usage_error(self, capsys):
        assert cli_main(["lattice", "--config", "no-such-recipe"]) == 2

    def test_model_mismatch(self, tmp_path, capsys):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({
            "model": "boltzmann", "config": dict(BOLTZ_CONFIG),
            "t_max": 0.05, "ensemble": 2,
            "observables": [{"name": "meyer_wallach"}]}))
        assert cli_main(["lattice", "--config", str(cfg)]) == 2

    def test_run_writes_outputs(self, tmp_path, capsys):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({
            "model": "boltzmann", "config": dict(BOLTZ_CONFIG),
            "t_max": 0.05, "n_samples": 3, "ensemble": 4, "seed": 1,
            "observables": [{"name": "mean_single_entropy"}]}))
        out_dir = tmp_path / "res"
        assert cli_main(["boltzmann", "--config", str(cfg),
                         "--out", str(out_dir)]) == 0
        assert (out_dir / "results.csv").exists()
        first = (out_dir / "results.csv").read_bytes()
        assert cli_main(["boltzmann", "--config", str(cfg),
                         "--out", str(out_dir)]) == 0
        assert (out_dir / "results.csv").read_bytes() == first

    def test_env_override(self, tmp_path, capsys, monkeypatch):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({
            "model": "boltzmann", "config": dict(BOLTZ_CONFIG),
            "t_max": 0.05, "n_samples": 2, "ensemble": 2, "seed": 1,
            "observables": [{"name": "mean_single_entropy"}]}))
        monkeypatch.setenv("SPINGAS_ENSEMBLE", "5")
        assert cli_main(["boltzmann", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert "n=5" in out

    def test_bundled_recipes_resolve(self):
        from spingas.cli import _resolve_config
        for name in ("fig1a", "fig1b", "fig2a", "fig2b",
                     "boltzmann-shorttime", "equilibrium"):
            path = _resolve_config(name)
            spec = ExperimentSpec.from_file(path)
            assert spec.model in ("boltzmann", "lattice")

    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "spingas", "analytic", "--eq", "tau",
             "--dphi", "0.1", "--dt", "1.0"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "tau_e 800" in proc.stdout
