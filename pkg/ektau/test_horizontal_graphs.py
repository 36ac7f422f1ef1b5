import math

import numpy as np
import pandas as pd
import pytest

from ektau.core.errors import ContractViolationError, SolverError
from ektau.core.horizontal_graphs import (
    BoundaryTrace,
    GraphFunction,
    boundary_grid,
    coons_extension,
    consistency_vs_mean_curvature,
    fmp_tangency_curve,
    newton_rate,
    plane_solution,
    residual,
    solve_dirichlet,
    vertical_graph_height,
    vertical_solution,
)
from ektau.tools.pde_tools import approximate_entire, solve_pde

UNIT = (0.0, 1.0, 0.0, 1.0)


def perturbed(y, z):
    return 0.5 * y + 0.05 * np.sin(math.pi * y + 0.3) * np.sin(math.pi * z + 0.7)


@pytest.mark.parametrize("gf", [plane_solution(0.5, 1.0), plane_solution(-2.0, 0.0),
                                vertical_solution(2.0, -1.0), vertical_solution(0.0, 3.0)],
                         ids=lambda gf: gf.name)
def test_exact_solutions_have_zero_residual(gf):
    assert residual(gf).sup == 0.0


def test_y_squared_is_not_minimal():
    def fun(y, z):
        zero = np.zeros_like(y)
        return y * y, 2.0 * y, zero, np.full_like(y, 2.0), zero, zero

    gf = GraphFunction.from_closed_form(fun, (-1.0, 1.0, -1.0, 1.0), (17, 17))
    np.testing.assert_allclose(residual(gf).values, 2.0)
    report = consistency_vs_mean_curvature(gf)
    assert report.small_residual_nodes == 0
    # the residual has one sign, so does H
    assert report.sign_agreement in (0.0, 1.0)


def _wavy(shift=0.0, lift=0.0):
    def fun(y, z):
        w = z + shift
        return (y * y + 0.3 * y * w + np.sin(w) + lift, 2.0 * y + 0.3 * w, 0.3 * y + np.cos(w),
                np.full_like(y, 2.0), np.full_like(y, 0.3), -np.sin(w))

    return fun


def test_residual_ignores_adding_a_constant():
    rect = (-1.0, 1.0, -1.0, 1.0)
    base = residual(GraphFunction.from_closed_form(_wavy(), rect, (17, 17))).values
    lifted = residual(GraphFunction.from_closed_form(_wavy(lift=2.5), rect, (17, 17))).values
    assert np.max(np.abs(base)) > 0.1
    np.testing.assert_array_equal(lifted, base)


def test_residual_commutes_with_z_translation():
    shift = 0.75
    base = residual(GraphFunction.from_closed_form(_wavy(), (-1.0, 1.0, -1.0, 1.0), (17, 17))).values
    moved = residual(GraphFunction.from_closed_form(_wavy(shift), (-1.0, 1.0, -1.0 - shift, 1.0 - shift),
                                                    (17, 17))).values
    np.testing.assert_allclose(moved, base, atol=1e-12)


def test_exact_solutions_are_minimal_surfaces():
    report = consistency_vs_mean_curvature(vertical_solution(2.0, -1.0, shape=(17, 17)))
    assert report.other_nodes == 0
    assert report.max_abs_h < 1e-8


@pytest.mark.parametrize("fun", [lambda y, z: 0.5 * y + 1.0, lambda y, z: 2.0 * z - 1.0 + 0.0 * y])
def test_dirichlet_recovers_affine_data(fun):
    gf = solve_dirichlet(UNIT, fun, shape=(33, 33))
    Y, Z = gf.mesh()
    assert np.max(np.abs(gf.values - fun(Y, Z))) < 1e-10
    assert gf.solver["min_eta_x"] > 0.0


def test_dirichlet_converges_quadratically_on_perturbed_data():
    gf = solve_dirichlet(UNIT, perturbed, shape=(33, 33))
    history = gf.solver["residual_sup"]
    assert history[-1] < 1e-8
    assert newton_rate(history) < 0.1
    assert gf.solver["min_eta_x"] > 0.0


def test_exhausted_newton_reports_its_history():
    with pytest.raises(SolverError) as err:
        solve_dirichlet(UNIT, perturbed, shape=(17, 17), max_iter=0)
    assert len(err.value.history) == 1


def test_initial_guess_shape_is_checked():
    with pytest.raises(ContractViolationError):
        solve_dirichlet(UNIT, perturbed, u0=np.zeros((5, 5)), shape=(17, 17))


def test_boundary_trace_matches_the_closed_form():
    y = np.linspace(0.0, 1.0, 11)
    ones, zeros = np.ones_like(y), np.zeros_like(y)
    ty = np.concatenate([zeros, ones, y, y])
    tz = np.concatenate([y, y, zeros, ones])
    trace = BoundaryTrace(ty, tz, 0.5 * ty + 1.0)
    fun = lambda yy, zz: 0.5 * yy + 1.0 + 0.0 * zz
    np.testing.assert_allclose(boundary_grid(UNIT, (21, 21), trace), boundary_grid(UNIT, (21, 21), fun), atol=1e-12)


def test_coons_extension_reproduces_bilinear_data():
    fun = lambda y, z: 1.0 + 2.0 * y - z + 3.0 * y * z
    Y, Z = np.meshgrid(np.linspace(0.0, 1.0, 9), np.linspace(0.0, 1.0, 9), indexing="ij")
    np.testing.assert_allclose(coons_extension(boundary_grid(UNIT, (9, 9), fun)), fun(Y, Z), atol=1e-12)


def test_vertical_graph_height():
    c, d = 2.0, 1.0
    height = vertical_graph_height(c, d)
    y, z = 0.3, -0.7
    u = c * z + d
    # the point (u, y, z + y u / 2) lies on z = height(x, y)
    assert height(u, y) == pytest.approx(z + 0.5 * y * u)
    with pytest.raises(ContractViolationError):
        vertical_graph_height(0.0, 1.0)


@pytest.mark.parametrize("theta", [0.0, 0.5])
def test_tangency_curve(theta):
    curve = fmp_tangency_curve(theta, math.pi / 2)
    assert curve.verdict == "tangent along curve"
    np.testing.assert_allclose(curve.x, -math.sinh(2.0 * theta) * np.sqrt(1.0 + curve.y ** 2))
    assert curve.on_curve_max < 1e-8
    assert curve.off_curve_min > 1e-3


def test_tangency_for_alpha_zero():
    curve = fmp_tangency_curve(0.5, 0.0)
    assert curve.verdict == "tangent everywhere"
    assert curve.x is None
    assert curve.on_curve_max < 1e-8


def test_solve_pde_from_an_expression():
    result = solve_pde({"expression": "0.5*y + 1"}, grid=17, write=False)
    assert result["status"] == "success"
    assert result["iterations"] == 0
    assert result["sup_distance_to_expression"] < 1e-10


def test_solve_pde_from_a_csv_trace(tmp_path):
    y = np.linspace(0.0, 2.0, 21)
    z = np.linspace(0.0, 1.0, 11)
    rows = ([(0.0, t) for t in z] + [(2.0, t) for t in z] + [(s, 0.0) for s in y] + [(s, 1.0) for s in y])
    df = pd.DataFrame(rows, columns=["y", "z"])
    df["g"] = 0.5 * df["y"]
    path = tmp_path / "trace.csv"
    df.to_csv(path, index=False)
    result = solve_pde({"csv": str(path)}, domain=(2.0, 1.0), grid=17, write=False)
    assert result["status"] == "success"
    assert result["residual_norms"]["sup"] < 1e-8
    assert "sup_distance_to_expression" not in result


def test_solve_pde_without_boundary_data():
    result = solve_pde({}, write=False)
    assert result["status"] == "error"
    assert result["error_kind"] == "validation"


def test_approximate_entire_recovers_a_plane():
    result = approximate_entire("0.5*y + 1", sizes=(1.0, 2.0), grid=17)
    assert result["status"] == "success"
    assert all(row["sup_distance"] < 1e-10 for row in result["rows"])
