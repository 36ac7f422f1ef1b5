import math

import numpy as np
import pytest

from ektau.core.errors import ContractViolationError, PreconditionError, ResolutionError
from ektau.core.parabolicity import (
    CutoffFamily,
    MetricGrid,
    area_growth,
    capacity_minimality,
    cutoff_energy,
    decays_to_zero,
    energy_scaling_exponent,
    estimate_chain_check,
    flat_cylinder,
    flat_plane,
    hyperbolic_plane,
)
from ektau.tools.parabolicity_tools import run_parabolicity


def ones(r, th):
    return np.ones_like(r)


def test_plane_log_cutoff_energies():
    family = CutoffFamily.log_family(flat_plane(), 1.0, 8)
    for j in range(1, 9):
        assert cutoff_energy(family, j) == pytest.approx(2.0 * math.pi / j, rel=1e-10)


def test_plane_energy_exponent_is_minus_one():
    assert energy_scaling_exponent(CutoffFamily.log_family(flat_plane(), 0.5, 6)) == pytest.approx(-1.0, abs=1e-9)


def test_cutoff_values():
    family = CutoffFamily.log_family(flat_plane(), 1.0, 2)
    phi = family.value(2, np.array([0.5, 1.0, math.e, math.e ** 2, 10.0]))
    np.testing.assert_allclose(phi, [1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-12)


def test_constant_pair_satisfies_the_chain():
    report = estimate_chain_check(flat_plane(), ones, ones, CutoffFamily.log_family(flat_plane(), 1.0, 4))
    assert report.hypothesis_holds
    assert report.ratio_constant
    assert all(row["middle_holds"] and row["final_holds"] for row in report.rows)
    assert report.trend_to_zero


def test_harmonic_linear_function_satisfies_the_chain():
    u = lambda r, th: r * np.cos(th)
    report = estimate_chain_check(flat_plane(), u, ones, CutoffFamily.log_family(flat_plane(), 1.0, 3))
    assert report.hypothesis_holds
    assert not report.ratio_constant
    assert report.rows[0]["inner"] == pytest.approx(math.pi, rel=1e-3)


def test_gaussian_is_flagged_non_jacobi():
    u = lambda r, th: np.exp(-r * r)
    report = estimate_chain_check(flat_plane(), u, ones, CutoffFamily.log_family(flat_plane(), 1.0, 3))
    assert report.non_jacobi
    assert report.hypothesis_minimum < 0.0
    assert len(report.rows) == 3


def test_chain_for_a_non_jacobi_pair_is_reported_not_raised():
    u = lambda r, th: np.sin(r * np.cos(th)) * np.exp(-r * r)
    report = estimate_chain_check(flat_plane(), u, ones, CutoffFamily.log_family(flat_plane(), 1.0, 6))
    assert report.non_jacobi
    assert report.hypothesis_minimum < 0.0
    first, last = report.rows[0], report.rows[-1]
    assert first["final_holds"]
    # the bound 4 C E(phi_j) shrinks like 1/j below the fixed Dirichlet energy of u
    assert last["inner"] + last["outer"] > last["final_bound"]
    assert not last["final_holds"]
    assert report.trend_to_zero


@pytest.mark.parametrize("values,expected", [
    ([1.0, 0.5, 0.25], True),
    ([1.0, 0.9, 0.6, 0.5], True),
    ([1.0, 0.5, 0.7, 0.3], False),
    ([1.0, 1.0, 1.0], False),
    ([1.0, 0.9, 0.8], False),
])
def test_decays_to_zero(values, expected):
    assert decays_to_zero(values) is expected


def test_decay_needs_two_terms():
    with pytest.raises(ContractViolationError):
        decays_to_zero([1.0])


def test_growing_hyperbolic_energies_do_not_trend_to_zero():
    family = CutoffFamily.log_family(hyperbolic_plane(), 1.0, 3)
    report = estimate_chain_check(hyperbolic_plane(), ones, ones, family)
    assert report.hypothesis_holds
    energies = [row["energy"] for row in report.rows]
    assert energies[-1] > energies[0]
    assert report.trend_to_zero is False


def test_positive_v_is_required():
    with pytest.raises(PreconditionError):
        estimate_chain_check(flat_plane(), ones, lambda r, th: -np.ones_like(r),
                             CutoffFamily.log_family(flat_plane(), 1.0, 2))


def test_capacity_is_realized_by_the_harmonic_taper():
    result = capacity_minimality(hyperbolic_plane(), 1.0, 3.0)
    assert result["minimizer"] == "harmonic"
    plane = capacity_minimality(flat_plane(), 1.0, math.e ** 2)["energies"]
    # on the plane the harmonic taper is the log taper
    assert plane["harmonic"] == pytest.approx(plane["log"], rel=1e-6)
    assert plane["log"] < plane["linear"]


def test_coarse_annuli_are_refused():
    with pytest.raises(ResolutionError):
        cutoff_energy(CutoffFamily.log_family(flat_plane(), 1.0, 2, radial_nodes=32), 1)


def test_degenerate_taper_is_refused():
    family = CutoffFamily(flat_plane(), ((1.0, 1.0),))
    with pytest.raises(ContractViolationError):
        cutoff_energy(family, 1)
    with pytest.raises(ContractViolationError):
        CutoffFamily(flat_plane(), ((1.0, 2.0),), taper="cubic")


def test_cylinder_cutoff_energy_grows_linearly_in_the_width():
    family = CutoffFamily(flat_cylinder(1.0), ((0.0, 2.0), (0.0, 4.0)), "linear")
    # 2pi f int (1/w)^2 = c / w
    assert cutoff_energy(family, 1) == pytest.approx(0.5, rel=1e-10)
    assert cutoff_energy(family, 2) == pytest.approx(0.25, rel=1e-10)


def test_plane_area_growth_is_quadratic():
    report = area_growth(MetricGrid.plane(), (0.0, 0.0), [2.0, 4.0, 6.0, 8.0])
    assert report.at_most_quadratic
    assert not report.truncated
    assert report.exponent == pytest.approx(2.0, abs=0.1)


def test_cylinder_area_growth_is_linear():
    report = area_growth(MetricGrid.cylinder(), (0.0, 0.0), [4.0, 8.0, 12.0, 16.0])
    assert report.exponent == pytest.approx(1.0, abs=0.1)


def test_hyperbolic_area_growth_is_not_quadratic():
    report = area_growth(MetricGrid.hyperbolic_disk(), (0.0, 0.0), [1.0, 1.5, 2.0, 2.5, 3.0])
    assert not report.at_most_quadratic


def test_run_parabolicity_on_the_plane():
    result = run_parabolicity("plane", count=4, write=False)
    assert result["status"] == "success"
    assert result["chain_holds"]
    for row in result["rows"]:
        assert row["energy"] == pytest.approx(row["expected"], rel=0.01)
    assert result["growth"]["at_most_quadratic"]


def test_run_parabolicity_rejects_unknown_models():
    result = run_parabolicity("torus", write=False)
    assert result["status"] == "error"
    assert result["error_kind"] == "validation"
