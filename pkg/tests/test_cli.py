"""Config validation, experiment execution, determinism, exit codes."""

import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from hologate import cli

PI = math.pi


def write_config(tmp_path: Path, name: str, payload: dict) -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def gate_config(**overrides):
    cfg = {
        "version": "1",
        "experiment": "gate",
        "model": {"d": 2, "W": 10.0, "gamma": 0.0},
        "params": {
            "loop": {"profile": "pacman", "R": 2.0, "beta": PI, "t1": 3.0, "t2": 4.0},
            "omega": [0.0, 1.0],
            "arity": "one",
        },
    }
    cfg.update(overrides)
    return cfg


class TestValidation:
    def test_malformed_json_exits_2_no_outputs(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        rc = cli.run_config(str(path), out_dir=str(tmp_path / "out"))
        assert rc == cli.EXIT_SCHEMA
        assert not (tmp_path / "out").exists()

    def test_unknown_experiment(self, tmp_path):
        path = write_config(tmp_path, "c.json", gate_config(experiment="nope"))
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == cli.EXIT_SCHEMA

    def test_unknown_keys_rejected(self, tmp_path):
        cfg = gate_config()
        cfg["params"]["surprise"] = 1
        path = write_config(tmp_path, "c.json", cfg)
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == cli.EXIT_SCHEMA

    def test_wrong_version_rejected(self, tmp_path):
        path = write_config(tmp_path, "c.json", gate_config(version="2"))
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == cli.EXIT_SCHEMA

    def test_unreachable_phase_exits_4(self, tmp_path):
        cfg = gate_config()
        cfg["params"]["loop"]["R"] = math.sqrt(2.0)
        cfg["params"]["target_alpha2"] = PI
        path = write_config(tmp_path, "c.json", cfg)
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == cli.EXIT_UNREACHABLE

    def test_target_alpha2_needs_pacman(self, tmp_path):
        cfg = gate_config()
        cfg["params"]["loop"] = {
            "profile": "samples",
            "times": [0, 1, 2, 3],
            "values": [[0, 0], [1, 0], [1, 1], [0, 0]],
        }
        cfg["params"]["target_alpha2"] = PI
        path = write_config(tmp_path, "c.json", cfg)
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == cli.EXIT_SCHEMA

    def test_out_dir_env_var(self, tmp_path, monkeypatch):
        target = tmp_path / "env_out"
        monkeypatch.setenv("HOLOGATE_OUT_DIR", str(target))
        path = write_config(tmp_path, "g.json", gate_config())
        assert cli.run_config(str(path)) == 0
        assert (target / "g.gate.json").exists()

    def test_open_sampled_loop_exits_3(self, tmp_path):
        cfg = {
            "version": "1",
            "experiment": "transport",
            "model": {"d": 2, "W": 10.0},
            "params": {
                "loop": {
                    "profile": "samples",
                    "times": [0, 1, 2, 3, 4],
                    "values": [[0, 0], [0.5, 0], [1, 0.2], [0.8, 0.4], [0.3, 0.1]],
                },
                "omega": [0.0, 1.0],
                "arity": "one",
            },
            "steps": 256,
        }
        path = write_config(tmp_path, "open.json", cfg)
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == cli.EXIT_NUMERIC


class TestGateExperiment:
    def test_emits_closed_form_phase(self, tmp_path):
        path = write_config(tmp_path, "g.json", gate_config())
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == 0
        payload = json.loads((tmp_path / "g.gate.json").read_text())
        assert payload["alpha1"] == pytest.approx(PI * 4.0 / 5.0, abs=1e-9)
        u = np.array([[complex(re, im) for re, im in row] for row in payload["U"]])
        assert u.shape == (2, 2)
        assert abs(u[1, 1] - np.exp(1j * payload["alpha1"])) < 1e-9
        # radial table carries the sign change of the entangling density
        lines = (tmp_path / "g.radial.csv").read_text().strip().split("\n")
        assert lines[0] == "r,C1,C2"
        c2 = np.array([float(l.split(",")[2]) for l in lines[1:]])
        assert np.count_nonzero(np.diff(np.sign(c2))) == 1
        manifest = json.loads((tmp_path / "g.manifest.json").read_text())
        assert set(manifest["outputs"]) == {"g.gate.json", "g.radial.csv", "g.loop.csv"}

    def test_transport_experiment(self, tmp_path):
        cfg = gate_config(experiment="transport")
        cfg["params"]["arity"] = "two"
        cfg["params"]["target_alpha2"] = PI
        cfg["steps"] = 2048
        path = write_config(tmp_path, "t.json", cfg)
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == 0
        payload = json.loads((tmp_path / "t.transport.json").read_text())
        assert payload["op_distance_to_analytic"] <= 1e-6
        assert payload["block_offdiag"] <= 1e-10

    def test_gap_experiment_saturates(self, tmp_path):
        cfg = {
            "version": "1",
            "experiment": "gap",
            "model": {"d": 2},
            "params": {"W_list": [1, 2, 5, 10, 40, 100], "R": 5.0, "omega": [0.0, 1.0], "n_path": 5},
        }
        path = write_config(tmp_path, "gap.json", cfg)
        assert cli.run_config(str(path), out_dir=str(tmp_path)) == 0
        lines = (tmp_path / "gap.gap.csv").read_text().strip().split("\n")
        assert lines[0] == ",".join(cli.GAP_CSV_HEADER)
        rows = [dict(zip(cli.GAP_CSV_HEADER, map(float, l.split(",")))) for l in lines[1:]]
        gaps = [r["gap_arc"] for r in rows]
        assert all(a <= b + 1e-12 for a, b in zip(gaps, gaps[1:]))  # saturation curve rises
        assert abs(gaps[-1] - rows[-1]["asymptotic_gap"]) / gaps[-1] < 0.05
        assert max(r["quintic_mismatch"] for r in rows) < 1e-8


class TestDeterminism:
    def test_rerun_byte_identical(self, tmp_path):
        cfg = {
            "version": "1",
            "experiment": "stochastic",
            "model": {"d": 2, "W": 10.0},
            "params": {
                "loop": {"profile": "pacman", "R": 2.0, "beta": PI, "t1": 5.0, "t2": 5.0},
                "omega": [0.0, 1.0],
                "sigma2": 1.0,
                "tau_c": 0.5,
                "gamma_noise": 0.05,
                "n_traj": 64,
            },
            "seed": 7,
            "steps": 256,
        }
        path = write_config(tmp_path, "s.json", cfg)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli.run_config(str(path), out_dir=str(out_a)) == 0
        assert cli.run_config(str(path), out_dir=str(out_b)) == 0
        body_a = (out_a / "s.stochastic.json").read_bytes()
        body_b = (out_b / "s.stochastic.json").read_bytes()
        assert body_a == body_b

    def test_coherent_csv_byte_identical(self, tmp_path):
        cfg = {
            "version": "1",
            "experiment": "coherent-sweep",
            "model": {"d": 2},
            "params": {"R_list": [3, 5], "epsilon_list": [1e-3, 1e-2]},
        }
        path = write_config(tmp_path, "c.json", cfg)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli.run_config(str(path), out_dir=str(out_a)) == 0
        assert cli.run_config(str(path), out_dir=str(out_b)) == 0
        assert (out_a / "c.coherent.csv").read_bytes() == (out_b / "c.coherent.csv").read_bytes()


class TestListCommand:
    def test_lists_six_experiments(self, capsys):
        assert cli.list_experiments() == 0
        out = capsys.readouterr().out.strip().split("\n")
        assert len(out) == 6
        names = {line.split(":")[0] for line in out}
        assert names == {"gate", "transport", "gap", "time-sweep", "coherent-sweep", "stochastic"}

    def test_schema_output_is_valid_json(self, capsys):
        assert cli.list_experiments("gate") == 0
        schema = json.loads(capsys.readouterr().out)
        assert schema["properties"]["experiment"]["const"] == "gate"

    def test_unknown_schema_name(self, capsys):
        assert cli.list_experiments("nope") == cli.EXIT_SCHEMA


class TestConsoleEntry:
    def test_installed_script_runs(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "hologate.cli", "list"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "time-sweep" in proc.stdout

    def test_error_record_on_stderr(self, tmp_path):
        path = write_config(tmp_path, "bad.json", gate_config(version="9"))
        proc = subprocess.run(
            [sys.executable, "-m", "hologate.cli", "run", str(path), "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == cli.EXIT_SCHEMA
        record = json.loads(proc.stderr.strip().split("\n")[-1])
        assert record["error"]["kind"] == "schema"


class TestShippedConfigs:
    def test_all_shipped_configs_validate(self):
        import jsonschema

        configs = sorted(Path(__file__).resolve().parent.parent.glob("configs/*.json"))
        assert len(configs) >= 7
        for cfg_path in configs:
            raw = json.loads(cfg_path.read_text())
            jsonschema.validate(raw, cli.config_schema(raw["experiment"]))
