import json

import numpy as np
import pytest

from mrflearn import (build_diamond, incoherence, load_samples, save_model,
                      sample_exact, save_samples)
from mrflearn.cli import main


def write_diamond(tmp_path, n=5, a=0.25):
    model = build_diamond(n, a)
    path = tmp_path / "model.json"
    save_model(model, path)
    return model, path


class TestSample:
    def test_exact_sampling_writes_csv_and_sidecar(self, tmp_path, capsys):
        model, model_path = write_diamond(tmp_path)
        rc = main(["sample", "--model", str(model_path), "--num", "50",
                   "--seed", "3", "--out", str(tmp_path / "out")])
        assert rc == 0
        ss = load_samples(tmp_path / "out" / "samples.csv")
        assert ss.num == 50 and ss.n == 5
        assert ss.seed == 3 and ss.method == "exact"
        direct = sample_exact(model, 50, seed=3)
        np.testing.assert_array_equal(ss.samples, direct.samples)
        blob = json.loads(capsys.readouterr().out)
        assert blob["num"] == 50

    def test_gibbs_method(self, tmp_path):
        _, model_path = write_diamond(tmp_path, n=4)
        rc = main(["sample", "--model", str(model_path), "--num", "20",
                   "--seed", "1", "--method", "gibbs", "--burn-in", "10",
                   "--thinning", "2", "--out", str(tmp_path / "g")])
        assert rc == 0
        assert load_samples(tmp_path / "g" / "samples.csv").method == "gibbs"


class TestLearn:
    def test_learn_ising_round_trip(self, tmp_path, capsys):
        model, model_path = write_diamond(tmp_path, n=5, a=0.3)
        ss = sample_exact(model, 20_000, seed=5)
        save_samples(ss, tmp_path / "samples.csv")
        rc = main(["learn-ising", "--samples", str(tmp_path / "samples.csv"),
                   "--lam", "0.9", "--eta", "0.3", "--solver", "reference",
                   "--out", str(tmp_path / "fit")])
        assert rc == 0
        blob = json.loads((tmp_path / "fit" / "result.json").read_text())
        assert [tuple(e) for e in blob["edges"]] == model.edges()
        adj = np.loadtxt(tmp_path / "fit" / "edges.csv", delimiter=",")
        assert adj.sum() == 2 * len(model.edges())
        out = json.loads(capsys.readouterr().out)
        assert [tuple(e) for e in out["edges"]] == model.edges()

    def test_learn_ising_rejects_sparsitron(self, tmp_path, capsys):
        model, _ = write_diamond(tmp_path)
        ss = sample_exact(model, 500, seed=1)
        save_samples(ss, tmp_path / "s.csv")
        rc = main(["learn-ising", "--samples", str(tmp_path / "s.csv"),
                   "--lam", "1.0", "--eta", "0.2", "--solver", "sparsitron",
                   "--out", str(tmp_path / "x")])
        assert rc == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "CLIError"

    def test_learn_pairwise_with_sparsitron(self, tmp_path):
        from mrflearn import build_grid
        model = build_grid(2, 2, 2, 0.25, seed=2)
        ss = sample_exact(model, 4000, seed=6)
        save_samples(ss, tmp_path / "p.csv")
        rc = main(["learn-pairwise", "--samples", str(tmp_path / "p.csv"),
                   "--lam", "0.5", "--eta", "0.25", "--solver", "sparsitron",
                   "--seed", "4", "--out", str(tmp_path / "fit")])
        assert rc == 0
        blob = json.loads((tmp_path / "fit" / "result.json").read_text())
        assert blob["solver"] == "sparsitron"


class TestIncoherence:
    def test_matches_library_value(self, tmp_path, capsys):
        model, model_path = write_diamond(tmp_path, n=6, a=0.3)
        rc = main(["incoherence", "--model", str(model_path), "--node", "0"])
        assert rc == 0
        blob = json.loads(capsys.readouterr().out)
        assert blob["incoherence"] == pytest.approx(incoherence(model, 0))


class TestExperiment:
    def test_sweep_with_overrides(self, tmp_path, capsys):
        cfg = {"family": "diamond", "sample_sizes": [200, 400], "runs": 2,
               "n": 4, "edge_weight": 0.3, "solver": "reference",
               "master_seed": 1}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        rc = main(["experiment", "--config", str(cfg_path), "--runs", "3",
                   "--seed", "9", "--out", str(tmp_path / "exp")])
        assert rc == 0
        curve = (tmp_path / "exp" / "curve.csv").read_text().splitlines()
        assert curve[0] == "sample_size,recovery_fraction,mean_max_error,stderr"
        assert len(curve) == 3
        manifest = json.loads((tmp_path / "exp" / "curve.json").read_text())
        assert manifest["config"]["runs"] == 3
        assert manifest["config"]["master_seed"] == 9
        records = json.loads((tmp_path / "exp" / "records.json").read_text())
        assert len(records["records"]) == 6


class TestErrors:
    def test_missing_model_is_json_error(self, tmp_path, capsys):
        rc = main(["sample", "--model", str(tmp_path / "nope.json"),
                   "--num", "5", "--out", str(tmp_path)])
        assert rc == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "FileNotFoundError"

    def test_bad_arguments_json_error(self, capsys):
        rc = main(["sample", "--num", "5"])
        assert rc == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "CLIError"

    def test_unknown_command(self, capsys):
        rc = main(["frobnicate"])
        assert rc == 1
        json.loads(capsys.readouterr().err)
