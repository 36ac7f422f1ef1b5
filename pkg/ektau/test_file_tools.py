import json
import math

import numpy as np
import pandas as pd
import pytest

from ektau.core.errors import ConfigError
from ektau.core.space import SpaceParams
from ektau.core.surfaces import cylinder_immersion
from ektau.tools.curvature_tools import compute_curvature, domain_rectangle
from ektau.tools.file_tools import (
    JobConfig,
    build_surface,
    expression_function,
    graph_jet_function,
    load_boundary_csv,
    load_job_config,
    parse_domain,
    parse_space,
    parse_surface,
)
from ektau.tools.report_tools import generate_markdown_report, generate_pdf_report


def test_parse_space_accepts_expressions():
    assert parse_space("kappa=-1, tau=1/2") == SpaceParams(-1.0, 0.5)


def test_parse_surface_families():
    assert parse_surface("cylinder:k=1") == {"family": "cylinder", "k": 1.0}
    assert parse_surface("fmp:theta=0.5") == {"family": "fmp", "theta": 0.5}
    assert parse_surface("vertical_plane:a=1,b=0") == {"family": "vertical_plane", "a": 1.0, "b": 0.0}
    assert parse_surface("horizontal_graph:u=2*z - 1") == {"family": "horizontal_graph", "u": "2*z - 1"}
    assert parse_surface("custom_grid:surface.csv") == {"family": "custom_grid", "csv": "surface.csv"}


@pytest.mark.parametrize("text", ["cylinder", "cylinder:k", "cylinder:k=abc", "sphere:r=1",
                                  "horizontal_graph:v=y", "cylinder:k=oo"])
def test_parse_surface_rejects(text):
    with pytest.raises(ConfigError):
        parse_surface(text)


def test_parse_domain():
    assert parse_domain("2x1") == (2.0, 1.0)
    assert parse_domain("pi X 1") == (math.pi, 1.0)
    with pytest.raises(ConfigError):
        parse_domain("2x0")
    with pytest.raises(ConfigError):
        parse_domain("2")


def test_job_config_validation():
    with pytest.raises(ConfigError):
        JobConfig(jobs=0)
    with pytest.raises(ConfigError) as err:
        JobConfig(tolerances={"newton": True})
    assert err.value.field == "tolerances.newton"


def test_load_job_config_resolves_relative_paths(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({
        "schema": 1, "command": "pde-solve", "boundary": {"csv": "trace.csv"},
        "domain": [2, 1], "grid": 17, "tolerances": {"newton": 1e-9}, "jobs": 2,
    }))
    cfg = load_job_config(str(path))
    assert cfg.boundary["csv"] == str(tmp_path / "trace.csv")
    assert cfg.domain == (2.0, 1.0)
    assert cfg.grid == 17
    assert cfg.jobs == 2


@pytest.mark.parametrize("payload,field", [
    ([1, 2], "<root>"),
    ({"schema": 1, "grid": 2.5}, "grid"),
    ({"schema": 1, "domain": [1]}, "domain"),
    ({"schema": 1, "surface": {"family": "fmp"}}, "surface.theta"),
    ({"schema": 1, "parabolicity": {"model": "plane", "radius": 2}}, "parabolicity.radius"),
    ({"schema": 1, "parabolicity": {"count": 0}}, "parabolicity.count"),
    ({"schema": 1, "parabolicity": {"r0": -1.0}}, "parabolicity.r0"),
])
def test_load_job_config_rejects(tmp_path, payload, field):
    path = tmp_path / "job.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ConfigError) as err:
        load_job_config(str(path))
    assert err.value.field == field


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_job_config(str(tmp_path / "absent.json"))


def test_expression_function():
    fun = expression_function("0.5*y + sin(pi*z)")
    y = np.array([0.0, 1.0])
    z = np.array([0.5, 0.0])
    np.testing.assert_allclose(fun(y, z), [1.0, 0.5], atol=1e-15)
    # constants broadcast to the grid
    assert expression_function("3")(y, z).shape == (2,)
    with pytest.raises(ConfigError):
        expression_function("x + y")


def test_graph_jet_function_has_exact_derivatives():
    jet = graph_jet_function("y**2*z")
    u, uy, uz, uyy, uyz, uzz = jet(np.array(2.0), np.array(3.0))
    assert (float(u), float(uy), float(uz), float(uyy), float(uyz), float(uzz)) == (12.0, 12.0, 4.0, 6.0, 4.0, 0.0)


def test_fmp_needs_nil():
    with pytest.raises(ConfigError):
        build_surface(SpaceParams(-1.0, 0.5), {"family": "fmp", "theta": 0.0})


def test_domain_rectangle():
    assert domain_rectangle("cylinder", (2.0, 1.0)) == (0.0, 2.0, 0.0, 1.0)
    assert domain_rectangle("fmp", (2.0, 1.0)) == (-1.0, 1.0, -0.5, 0.5)
    assert domain_rectangle("fmp", None) is None


def test_boundary_csv_needs_columns(tmp_path):
    path = tmp_path / "trace.csv"
    pd.DataFrame({"y": [0.0], "z": [0.0]}).to_csv(path, index=False)
    with pytest.raises(ConfigError):
        load_boundary_csv(str(path))


def test_custom_grid_surface(tmp_path, nil, output_dir):
    s = np.linspace(0.0, 1.0, 41)
    S, T = np.meshgrid(s, s, indexing="ij")
    xyz = cylinder_immersion(nil, 1.0)(S, T)
    df = pd.DataFrame({"s": S.ravel(), "t": T.ravel(), "x": xyz[..., 0].ravel(),
                       "y": xyz[..., 1].ravel(), "z": xyz[..., 2].ravel()})
    # row order in the file does not matter
    path = tmp_path / "cylinder.csv"
    df.sample(frac=1.0, random_state=0).to_csv(path, index=False)

    result = compute_curvature(nil, {"family": "custom_grid", "csv": str(path)}, write=False)
    assert result["status"] == "success"
    assert result["grid"] == [41, 41]
    assert result["H"]["mean"] == pytest.approx(0.5, abs=1e-3)


def test_custom_grid_must_be_complete(tmp_path, nil):
    path = tmp_path / "holes.csv"
    pd.DataFrame({"s": [0.0, 0.0, 1.0], "t": [0.0, 1.0, 0.0], "x": [0.0] * 3, "y": [0.0] * 3,
                  "z": [0.0] * 3}).to_csv(path, index=False)
    with pytest.raises(ConfigError):
        build_surface(nil, {"family": "custom_grid", "csv": str(path)})


def test_reports(output_dir):
    sections = [{"heading": "1. cylinder geometry", "passed": True, "content": "II = [[k, tau], [tau, 0]]",
                 "rows": [{"kappa": -1.0, "error": 1.25e-12, "passed": True}]}]
    md = generate_markdown_report("ektau verification", sections)
    assert md["status"] == "success"
    text = (output_dir / "verification.md").read_text()
    assert "| kappa | error | passed |" in text
    assert "1.25e-12" in text
    assert "| 1. cylinder geometry | PASS |" in text
    pdf = generate_pdf_report("ektau verification κ", sections)
    assert pdf["status"] == "success"
    assert pdf["pages"] >= 1
    assert (output_dir / "verification.pdf").exists()
