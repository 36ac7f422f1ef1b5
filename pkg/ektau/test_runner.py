import json
import math

import numpy as np
import pandas as pd
import pytest

from ektau import runner
from ektau.core.errors import SolverError


def _run(capsys, *argv):
    code = runner.run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def _write_config(tmp_path, payload, name="job.json"):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
    return str(path)


def test_curvature_of_the_nil_cylinder(capsys, output_dir):
    code, result = _run(capsys, "curvature", "--space", "kappa=0,tau=0.5", "--surface", "cylinder:k=1",
                        "--grid", "9", "--output-dir", str(output_dir))
    assert code == 0
    assert result["H"]["mean"] == pytest.approx(0.5, abs=1e-8)
    assert result["K_ext"]["mean"] == pytest.approx(-0.25, abs=1e-8)
    np.testing.assert_allclose(result["second_form_centre"], [[1.0, 0.5], [0.5, 0.0]], atol=1e-8)

    summary = json.loads((output_dir / "curvature.json").read_text())
    table = pd.read_csv(output_dir / "curvature.csv")
    assert summary["columns"] == list(table.columns)
    assert summary["csv"] == "curvature.csv"
    assert len(table) == 81


def test_artifacts_are_deterministic(capsys, output_dir):
    argv = ["curvature", "--space", "kappa=-1,tau=0.5", "--surface", "cylinder:k=0.5", "--grid", "7"]
    first, second = output_dir / "a", output_dir / "b"
    assert runner.run(argv + ["--output-dir", str(first)]) == 0
    assert runner.run(argv + ["--output-dir", str(second)]) == 0
    capsys.readouterr()
    for name in ("curvature.json", "curvature.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


@pytest.mark.parametrize("argv", [
    ["curvature", "--space", "kappa=0", "--surface", "cylinder:k=1"],
    ["curvature", "--space", "kappa=1,tau=0.5", "--surface", "cylinder:k=1"],
    ["curvature", "--space", "kappa=0,tau=0.5", "--surface", "torus:r=1"],
    ["curvature", "--space", "kappa=0,tau=0.5", "--surface", "cylinder:k=1", "--grid", "0"],
    ["spectrum", "--space", "kappa=0,tau=0.5", "--surface", "cylinder:k=1", "--domain", "2by1"],
    ["curvature", "--surface", "cylinder:k=1"],
])
def test_invalid_arguments_exit_with_one(capsys, output_dir, argv):
    code, result = _run(capsys, *argv)
    assert code == 1
    assert result["status"] == "error"
    assert result["error_kind"] == "validation"


def test_usage_errors_exit_with_one(capsys):
    assert runner.run(["no-such-command"]) == 1
    assert runner.run(["curvature", "--grid", "many"]) == 1
    assert capsys.readouterr().out == ""


def test_malformed_json_reports_line_and_column(capsys, tmp_path, output_dir):
    path = _write_config(tmp_path, '{\n  "schema": 1,\n  "command": curvature\n}\n')
    code, result = _run(capsys, "curvature", "--config", path)
    assert code == 1
    assert "line 3" in result["message"]


@pytest.mark.parametrize("payload,needle", [
    ({"schema": 2, "command": "curvature"}, "schema"),
    ({"schema": 1, "command": "curvature", "colour": "blue"}, "colour"),
    ({"schema": 1, "command": "spectrum"}, "command"),
    ({"schema": 1, "command": "curvature", "space": {"kappa": 0, "tau": 0.5, "sigma": 0}}, "sigma"),
    ({"schema": 1, "command": "curvature", "tolerances": {"newton": -1}}, "tolerances.newton"),
])
def test_schema_violations(capsys, tmp_path, output_dir, payload, needle):
    code, result = _run(capsys, "curvature", "--config", _write_config(tmp_path, payload))
    assert code == 1
    assert needle in result["message"]


def test_flags_override_the_config(capsys, tmp_path, output_dir):
    path = _write_config(tmp_path, {
        "schema": 1, "command": "curvature", "space": {"kappa": 0, "tau": 0.5},
        "surface": {"family": "cylinder", "k": 2}, "grid": 5, "output_dir": str(output_dir),
    })
    code, result = _run(capsys, "curvature", "--config", path, "--surface", "cylinder:k=1")
    assert code == 0
    assert result["H"]["mean"] == pytest.approx(0.5, abs=1e-8)
    assert result["grid"] == [5, 5]


def test_spectrum_of_a_product_cylinder(capsys, output_dir):
    code, result = _run(capsys, "spectrum", "--space", "kappa=-1,tau=0", "--surface", "cylinder:k=0",
                        "--grid", "24", "--output-dir", str(output_dir))
    assert code == 0
    assert result["formula"] == pytest.approx(2.0 * math.pi ** 2 + 1.0)
    assert result["relative_error"] < 5e-3
    assert result["lambda1_laplacian"] == pytest.approx(result["lambda1"] - 1.0, abs=1e-6)
    assert list(pd.read_csv(output_dir / "spectrum.csv").columns) == ["s", "t", "f"]


def test_spectrum_record_is_flat(capsys, output_dir):
    code, result = _run(capsys, "spectrum", "--space", "kappa=0,tau=0.5", "--surface", "cylinder:k=1",
                        "--domain", "2x1", "--grid", "16", "--output-dir", str(output_dir))
    assert code == 0
    summary = json.loads((output_dir / "spectrum.json").read_text())
    for record in (result, summary):
        assert record["kappa"] == 0.0
        assert record["tau"] == 0.5
        assert record["k_gamma"] == 1.0
        assert record["domain"] == [2.0, 1.0]
        assert record["grid"] == [16, 16]
        assert record["lambda1"] == pytest.approx(record["formula"], rel=1e-2)
        assert record["residual"] >= 0.0
    assert summary["space"]["kappa"] == 0.0


def test_stability_sweep_from_a_config(capsys, tmp_path, output_dir):
    path = _write_config(tmp_path, {
        "schema": 1, "command": "stability-sweep", "space": {"kappa": 0, "tau": 0.5},
        "surface": {"family": "cylinder", "k": 1}, "grid": 20,
        "sweep": [[1, 1], [2, 2], [4, 4], [6, 6]],
    })
    code, result = _run(capsys, "stability-sweep", "--config", path, "--output-dir", str(output_dir))
    assert code == 0
    assert result["verdict"] == "unstable"
    assert result["witness"] == [6.0, 6.0]


def test_stability_sweep_needs_a_cylinder(capsys, output_dir):
    code, result = _run(capsys, "stability-sweep", "--space", "kappa=0,tau=0.5", "--surface", "fmp:theta=0")
    assert code == 1


def test_pde_solve_with_affine_data(capsys, output_dir):
    code, result = _run(capsys, "pde-solve", "--boundary", "0.5*y + 1", "--grid", "17",
                        "--output-dir", str(output_dir))
    assert code == 0
    assert result["sup_distance_to_expression"] < 1e-10
    assert list(pd.read_csv(output_dir / "pde-solve.csv").columns) == ["y", "z", "u", "residual"]


def test_pde_solve_rejects_unknown_symbols(capsys, output_dir):
    code, result = _run(capsys, "pde-solve", "--boundary", "0.5*y + w")
    assert code == 1
    assert "w" in result["message"]


def test_solver_failures_exit_with_two(capsys, monkeypatch, output_dir):
    def failing(cfg, args):
        raise SolverError("Newton did not converge", [1.0, 0.5])

    monkeypatch.setattr(runner, "dispatch", failing)
    code, result = _run(capsys, "pde-solve", "--boundary", "y")
    assert code == 2
    assert result["error_kind"] == "solver"
    assert result["history"] == [1.0, 0.5]


def test_parabolicity_command(capsys, output_dir):
    code, result = _run(capsys, "--log-level", "error", "parabolicity", "--count", "3",
                        "--output-dir", str(output_dir))
    assert code == 0
    assert result["energy_exponent"] == pytest.approx(-1.0, abs=1e-9)
    assert (output_dir / "parabolicity.csv").exists()

    summary = json.loads((output_dir / "parabolicity.json").read_text())
    growth = pd.read_csv(output_dir / "parabolicity-growth.csv")
    assert summary["tables"]["growth"] == {"csv": "parabolicity-growth.csv", "columns": ["r", "vol", "ratio"]}
    assert list(growth.columns) == ["r", "vol", "ratio"]
    np.testing.assert_allclose(growth["ratio"], growth["vol"] / growth["r"] ** 2)


def test_parabolicity_settings_come_from_the_config(capsys, tmp_path, output_dir):
    path = _write_config(tmp_path, {
        "schema": 1, "command": "parabolicity", "output_dir": str(output_dir),
        "parabolicity": {"model": "cylinder", "pair": "linear", "count": 3, "r0": 0.5},
    })
    code, result = _run(capsys, "--log-level", "error", "parabolicity", "--config", path)
    assert code == 0
    assert result["model"].startswith("cylinder")
    assert result["pair"] == "linear"
    rows = pd.read_csv(output_dir / "parabolicity.csv")
    assert len(rows) == 3
    assert rows["r_j"].tolist() == [0.5, 0.5, 0.5]

    code, result = _run(capsys, "--log-level", "error", "parabolicity", "--config", path, "--model", "plane")
    assert code == 0
    assert result["model"] == "plane"
    assert result["pair"] == "linear"


def test_parabolicity_config_rejects_unknown_models(capsys, tmp_path, output_dir):
    path = _write_config(tmp_path, {"schema": 1, "command": "parabolicity", "parabolicity": {"model": "torus"}})
    code, result = _run(capsys, "parabolicity", "--config", path, "--output-dir", str(output_dir))
    assert code == 1
    assert "model" in result["message"]


@pytest.mark.slow
def test_verify_all_quick(capsys, output_dir):
    code, result = _run(capsys, "verify-all", "--quick", "--output-dir", str(output_dir))
    assert code == 0
    assert result["passed"] is True
    assert (output_dir / "verification.md").exists()
