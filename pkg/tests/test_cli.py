"""Experiment runner: schema validation, artifacts, determinism, exit codes."""

import hashlib
import json

from click.testing import CliRunner

from scn_squeeze.cli import main


def write_config(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run_cli(*args):
    return CliRunner().invoke(main, list(args))


def checksum(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


SPATIAL = {"kind": "learn-spatial", "seed": 3, "params": {"n_modes": 3}}


class TestValidate:
    def test_valid_config(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", SPATIAL)
        result = run_cli("validate", cfg)
        assert result.exit_code == 0
        assert "ok" in result.output

    def test_unknown_kind(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"kind": "frobnicate", "seed": 1})
        result = run_cli("validate", cfg)
        assert result.exit_code == 2
        assert "kind" in result.output

    def test_missing_seed(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"kind": "learn-spatial"})
        result = run_cli("validate", cfg)
        assert result.exit_code == 2
        assert "seed" in result.output

    def test_extra_field_warns_but_passes(self, tmp_path):
        doc = dict(SPATIAL, note="extra")
        cfg = write_config(tmp_path / "c.json", doc)
        result = run_cli("validate", cfg)
        assert result.exit_code == 0
        assert "warning" in result.output

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        result = run_cli("validate", str(path))
        assert result.exit_code == 2


class TestRunLearnSpatial:
    def test_artifacts_and_summary(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path / "c.json", dict(SPATIAL, output_dir=str(out)))
        result = run_cli("run", cfg)
        assert result.exit_code == 0
        assert "fidelity=" in result.output
        for name in ("result.json", "fidelity_history.csv", "cost_history.csv", "fidelity_history.png", "cost_history.png"):
            assert (out / name).exists()
        doc = json.loads((out / "result.json").read_text())
        assert doc["fidelity"] >= 0.99
        assert doc["format_version"] == 1
        assert len(doc["config_hash"]) == 64

    def test_csv_embeds_provenance(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path / "c.json", dict(SPATIAL, output_dir=str(out)))
        run_cli("run", cfg)
        first = (out / "fidelity_history.csv").read_text().splitlines()[0]
        assert first.startswith("# config_hash=")

    def test_deterministic_reruns(self, tmp_path):
        sums = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            cfg = write_config(tmp_path / f"{tag}.json", dict(SPATIAL, output_dir=str(out)))
            assert run_cli("run", cfg).exit_code == 0
            sums.append(
                (checksum(out / "fidelity_history.csv"), checksum(out / "cost_history.csv"))
            )
        assert sums[0] == sums[1]

    def test_seed_override_changes_output(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cfg_a = write_config(tmp_path / "a.json", dict(SPATIAL, output_dir=str(out_a)))
        cfg_b = write_config(tmp_path / "b.json", dict(SPATIAL, output_dir=str(out_b)))
        run_cli("run", cfg_a)
        run_cli("run", cfg_b, "--seed", "99")
        assert checksum(out_a / "cost_history.csv") != checksum(out_b / "cost_history.csv")

    def test_output_dir_override(self, tmp_path):
        override = tmp_path / "elsewhere"
        cfg = write_config(tmp_path / "c.json", dict(SPATIAL, output_dir=str(tmp_path / "orig")))
        result = run_cli("run", cfg, "--output-dir", str(override))
        assert result.exit_code == 0
        assert (override / "result.json").exists()

    def test_run_rejects_bad_config(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", {"kind": "nope", "seed": 1})
        assert run_cli("run", cfg).exit_code == 2

    def test_numeric_failure_exits_one(self, tmp_path):
        # infeasible squeeze-parameter gap constraint surfaces as exit 1
        doc = {
            "kind": "learn-spatial",
            "seed": 1,
            "output_dir": str(tmp_path / "out"),
            "params": {"n_modes": 3, "r_min": 0.1, "r_max": 0.2, "min_gap": 0.5},
        }
        cfg = write_config(tmp_path / "c.json", doc)
        result = run_cli("run", cfg)
        assert result.exit_code == 1
        assert "error" in result.output


class TestRunOtherKinds:
    def test_inverse_design(self, tmp_path):
        out = tmp_path / "out"
        doc = {
            "kind": "inverse-design",
            "seed": 2,
            "output_dir": str(out),
            "params": {"n_modes": 3, "coupling": "dense", "n_targets": 2, "restarts": 3},
        }
        cfg = write_config(tmp_path / "c.json", doc)
        result = run_cli("run", cfg)
        assert result.exit_code == 0
        assert "median_fidelity=" in result.output
        assert (out / "targets.csv").exists()
        assert (out / "best_stack.json").exists()
        doc = json.loads((out / "result.json").read_text())
        assert doc["median_fidelity"] >= 0.999

    def test_nonuniform_protocol(self, tmp_path):
        out = tmp_path / "out"
        doc = {
            "kind": "learn-frequency-nonuniform",
            "seed": 4,
            "output_dir": str(out),
            "params": {"n_modes": 4},
        }
        cfg = write_config(tmp_path / "c.json", doc)
        result = run_cli("run", cfg)
        assert result.exit_code == 0
        assert json.loads((out / "result.json").read_text())["fidelity"] >= 0.99

    def test_magnus_scaling_with_threads(self, tmp_path):
        out = tmp_path / "out"
        doc = {
            "kind": "magnus-scaling",
            "seed": 5,
            "output_dir": str(out),
            "params": {"n_list": [4, 6], "seeds": 3},
        }
        cfg = write_config(tmp_path / "c.json", doc)
        result = run_cli("run", cfg, "--threads", "2")
        assert result.exit_code == 0
        assert "slope=" in result.output
        lines = (out / "magnus_scaling.csv").read_text().splitlines()
        assert lines[2] == lines[2]  # header + comments present
        assert lines[2].startswith("n,finesse,")

    def test_trotter_scaling_small(self, tmp_path):
        out = tmp_path / "out"
        doc = {
            "kind": "trotter-scaling",
            "seed": 6,
            "output_dir": str(out),
            "params": {"n_list": [4], "ratios": [5, 20], "seeds": 1, "fid_tol": 1e-7},
        }
        cfg = write_config(tmp_path / "c.json", doc)
        result = run_cli("run", cfg)
        assert result.exit_code == 0
        assert "slope=" in result.output
        header = (out / "trotter_scaling.csv").read_text().splitlines()[2]
        assert header == "n,ratio,infidelity,seed"

    def test_learn_frequency_uniform(self, tmp_path):
        out = tmp_path / "out"
        doc = {
            "kind": "learn-frequency-uniform",
            "seed": 7,
            "output_dir": str(out),
            "params": {"n_modes": 3, "restarts": 3},
        }
        cfg = write_config(tmp_path / "c.json", doc)
        result = run_cli("run", cfg)
        assert result.exit_code == 0
        doc = json.loads((out / "result.json").read_text())
        assert doc["learning_fidelity"] >= 0.99
        assert doc["design_fidelity"] >= 0.99
        assert (out / "cavity_stack.json").exists()
