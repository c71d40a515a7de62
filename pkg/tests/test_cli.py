"""End-to-end tests of the command-line interface."""

import csv
import json
import subprocess
import sys

import pytest

from reluqubo.algebra import parse_qubo
from reluqubo.cli import main
from reluqubo.encoding import BinaryExpansion
from reluqubo.formulation import build_from_config, recommend_M
from reluqubo.solvers import exhaustive_solve


def expansion(depth, alpha, beta):
    return {"depth": depth, "alpha": alpha, "beta": beta}


def config_negative_range():
    """w covers [-4, 0] on the same spacing as the z grids."""
    return {
        "cost": {"kind": "quadratic", "target": 0.0, "scale": 0.0},
        "model": {"inputs": [1.0], "w": expansion(6, 4.0, -4.0)},
        "penalty": {"t": expansion(4, 1.0, -1.0),
                    "z1": expansion(6, 4.0, 0.0),
                    "z2": expansion(6, 4.0, 0.0),
                    "M": 252.0},
    }


def config_positive_range():
    cfg = config_negative_range()
    cfg["model"]["w"] = expansion(6, 4.0, 0.0)
    return cfg


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_tsv(text):
    rows = list(csv.DictReader(text.splitlines(), delimiter="\t"))
    return [{k: float(v) for k, v in row.items()} for row in rows]


class TestBuild:
    def test_minimal_config_builds_eight_vars(self, tmp_path, capsys):
        cfg = {
            "cost": {"kind": "quadratic", "target": 0.0, "scale": 0.0},
            "model": {"inputs": [1.0], "w": expansion(2, 2.0, 0.0)},
            "penalty": {"t": expansion(2, 1.0, -1.0),
                        "z1": expansion(2, 2.0, 0.0),
                        "z2": expansion(2, 2.0, 0.0),
                        "M": 4.0},
        }
        out = tmp_path / "model.qubo"
        code = main(["build", write_config(tmp_path, cfg), str(out)])
        assert code == 0
        model = parse_qubo(out.read_text())
        assert model.n_vars == 8
        assert "8 vars" in capsys.readouterr().out

    def test_auto_m_printed_in_summary(self, tmp_path, capsys):
        cfg = config_negative_range()
        cfg["penalty"]["M"] = "auto"
        out = tmp_path / "model.qubo"
        code = main(["build", write_config(tmp_path, cfg), str(out)])
        assert code == 0
        z = BinaryExpansion(6, 4.0, 0.0)
        expected = recommend_M(-4.0, 0.0, z, z)
        assert f"M={expected!r}" in capsys.readouterr().out

    def test_missing_penalty_names_key(self, tmp_path, capsys):
        cfg = config_negative_range()
        del cfg["penalty"]
        code = main(["build", write_config(tmp_path, cfg), str(tmp_path / "m.qubo")])
        assert code == 2
        assert "penalty" in capsys.readouterr().err

    def test_invalid_json_is_input_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{ nope")
        code = main(["build", str(path), str(tmp_path / "m.qubo")])
        assert code == 2


class TestSolve:
    def build_model(self, tmp_path, cfg):
        out = tmp_path / "model.qubo"
        assert main(["build", write_config(tmp_path, cfg), str(out)]) == 0
        return out

    def test_trivial_model_solves_to_offset(self, tmp_path, capsys):
        path = tmp_path / "m.qubo"
        path.write_text("qubo-v1\nvars 2\noffset 1.25\n")
        capsys.readouterr()
        assert main(["solve", str(path)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["energy"] == 1.25
        assert payload["assignment"] == "00"

    def test_fixed_m_reproduces_direct_solve(self, tmp_path, capsys):
        cfg = config_negative_range()
        model_path = self.build_model(tmp_path, cfg)
        built = build_from_config(cfg)
        w_bits = built.linear_spec.w_exp.quantize(-2.0)
        fixes = [f"w[0][{k}]={b}" for k, b in enumerate(w_bits)]
        capsys.readouterr()
        args = ["solve", str(model_path)]
        for f in fixes:
            args += ["--fix", f]
        assert main(args) == 0
        payload = json.loads(capsys.readouterr().out)
        direct = exhaustive_solve(
            built.model,
            fixed={built.var_ranges["w[0]"][k]: b for k, b in enumerate(w_bits)})
        assert payload["energy"] == direct.energy
        assert payload["energy"] == pytest.approx(2.0, abs=0.2)

    def test_sa_same_seed_identical_bytes(self, tmp_path):
        cfg = config_negative_range()
        model_path = self.build_model(tmp_path, cfg)
        cmd = [sys.executable, "-m", "reluqubo", "solve", str(model_path),
               "--solver", "sa", "--sweeps", "200", "--restarts", "4",
               "--seed", "11"]
        first = subprocess.run(cmd, capture_output=True, check=True)
        second = subprocess.run(cmd, capture_output=True, check=True)
        assert first.stdout == second.stdout
        assert first.stdout.strip()

    def test_unparseable_model_is_input_error(self, tmp_path, capsys):
        path = tmp_path / "junk.qubo"
        path.write_text("not a model\n")
        assert main(["solve", str(path)]) == 2

    def test_bit_cap_is_resource_error(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("RELUQUBO_BIT_CAP", "4")
        path = tmp_path / "wide.qubo"
        path.write_text("qubo-v1\nvars 8\noffset 0.0\n")
        assert main(["solve", str(path)]) == 3

    def test_fix_by_index(self, tmp_path, capsys):
        path = tmp_path / "m.qubo"
        path.write_text("qubo-v1\nvars 2\noffset 0.0\n0 0 -1.0\n1 1 -1.0\n")
        capsys.readouterr()
        assert main(["solve", str(path), "--fix", "0=0"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["assignment"] == "01"

    def test_bad_fix_rejected(self, tmp_path, capsys):
        path = tmp_path / "m.qubo"
        path.write_text("qubo-v1\nvars 1\noffset 0.0\n")
        assert main(["solve", str(path), "--fix", "b0=2"]) == 2
        assert main(["solve", str(path), "--fix", "nosuch=1"]) == 2


class TestVerify:
    def test_negative_points_pass(self, tmp_path, capsys):
        cfg = config_negative_range()
        cfg["verify"] = {"m_points": [0.0, -2.0, -4.0]}
        code = main(["verify", write_config(tmp_path, cfg)])
        captured = capsys.readouterr()
        assert code == 0
        rows = read_tsv(captured.out)
        assert [r["m"] for r in rows] == [0.0, -2.0, -4.0]
        # m = 0 sits on the weight grid: the all-zero z assignment is
        # feasible, so the minimum vanishes
        assert abs(rows[0]["qubo_min"]) <= 1e-9
        assert rows[1]["reference"] == 2.0
        assert rows[1]["abs_error"] <= 0.2
        assert rows[2]["abs_error"] <= 0.2
        for row in rows:
            assert row["abs_error"] == pytest.approx(
                abs(row["qubo_min"] - row["reference"]), abs=1e-15)

    def test_positive_point_passes(self, tmp_path, capsys):
        cfg = config_positive_range()
        cfg["verify"] = {"m_points": [0.0, 1.0, 3.0]}
        code = main(["verify", write_config(tmp_path, cfg)])
        captured = capsys.readouterr()
        assert code == 0
        rows = read_tsv(captured.out)
        assert rows[1]["reference"] == 0.0
        assert rows[1]["abs_error"] <= 0.2

    def test_undersized_z_range_fails_with_report(self, tmp_path, capsys):
        cfg = config_negative_range()
        cfg["penalty"]["z1"] = expansion(6, 1.0, 0.0)  # cannot reach z1 = 3
        cfg["penalty"]["M"] = 64.0
        cfg["verify"] = {"m_points": [-3.0]}
        code = main(["verify", write_config(tmp_path, cfg)])
        captured = capsys.readouterr()
        assert code == 1
        rows = read_tsv(captured.out)  # report still emitted
        assert len(rows) == 1
        assert rows[0]["abs_error"] > 1.0

    def test_missing_points_is_input_error(self, tmp_path, capsys):
        cfg = config_negative_range()
        code = main(["verify", write_config(tmp_path, cfg)])
        assert code == 2
        assert "verify.m_points" in capsys.readouterr().err

    def test_multi_dim_model_rejected(self, tmp_path, capsys):
        cfg = config_negative_range()
        cfg["model"]["inputs"] = [1.0, 1.0]
        cfg["verify"] = {"m_points": [0.0]}
        code = main(["verify", write_config(tmp_path, cfg)])
        assert code == 2
        assert "model.inputs" in capsys.readouterr().err


class TestSweep:
    def sweep_rows(self, tmp_path, capsys, grid="-4:4:0.5"):
        cfg = config_negative_range()
        cfg["model"]["w"] = expansion(6, 8.0, -4.0)  # span [-4, 4]
        code = main(["sweep", write_config(tmp_path, cfg), f"--grid={grid}"])
        captured = capsys.readouterr()
        assert code == 0
        return read_tsv(captured.out)

    def test_grid_row_count(self, tmp_path, capsys):
        rows = self.sweep_rows(tmp_path, capsys)
        assert len(rows) == 17
        assert rows[0]["m"] == -4.0
        assert rows[-1]["m"] == 4.0

    def test_negative_half_monotone_decreasing(self, tmp_path, capsys):
        rows = self.sweep_rows(tmp_path, capsys)
        negative = [r["qubo_min"] for r in rows if r["m"] < 0]
        assert all(a >= b - 1e-9 for a, b in zip(negative, negative[1:]))

    def test_tsv_roundtrips_via_csv_parser(self, tmp_path, capsys):
        rows = self.sweep_rows(tmp_path, capsys, grid="-1:1:0.5")
        assert len(rows) == 5
        assert set(rows[0]) == {"m", "qubo_min", "reference", "abs_error",
                                "residual_at_min"}

    def test_out_file(self, tmp_path, capsys):
        cfg = config_negative_range()
        out = tmp_path / "sweep.tsv"
        code = main(["sweep", write_config(tmp_path, cfg),
                     "--grid=-2:0:1", "--out", str(out)])
        assert code == 0
        rows = read_tsv(out.read_text())
        assert len(rows) == 3

    def test_bad_grid_is_input_error(self, tmp_path, capsys):
        cfg = config_negative_range()
        assert main(["sweep", write_config(tmp_path, cfg), "--grid", "0:1"]) == 2
