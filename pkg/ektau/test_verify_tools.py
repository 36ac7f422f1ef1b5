import pytest

from ektau.tools.verify_tools import (
    CHECKS,
    VerificationSettings,
    check_curvature_command,
    check_frame_examples,
    check_jacobi_identities,
    check_surface_examples,
    check_worked_examples,
)

QUICK = VerificationSettings.quick()


def test_checks_are_numbered_in_order():
    numbers = [check(QUICK).number for check in (check_worked_examples, check_frame_examples,
                                                 check_surface_examples, check_curvature_command)]
    assert numbers == [9, 10, 11, 13]
    assert CHECKS.index(check_jacobi_identities) == 11
    assert len(CHECKS) == 13


@pytest.mark.parametrize("check", [check_worked_examples, check_frame_examples, check_surface_examples,
                                   check_curvature_command])
def test_example_rows_carry_their_tolerance(check):
    result = check(QUICK)
    assert result.rows
    for row in result.rows:
        assert set(row) == {"example", "value", "expected", "error", "tolerance", "passed"}
        assert row["passed"] is (row["error"] <= row["tolerance"])
    failing = [row["example"] for row in result.rows if not row["passed"]]
    assert failing == []
    assert result.passed


def test_frame_examples_cover_the_connection_table():
    names = [row["example"] for row in check_frame_examples(QUICK).rows]
    assert "Nil Gamma_12^3" in names
    assert "nabla_E1 E2 = tau E3 in E(0,0.5)" in names
    assert "nabla_E1 E2 = tau E3 in E(0,1)" in names
    assert any(name.startswith("phi_u") for name in names)


def test_surface_examples_report_each_cylinder():
    names = [row["example"] for row in check_surface_examples(QUICK).rows]
    assert sum(name.startswith("q = k^2 + kappa") for name in names) == 4
    assert sum(name.startswith("H on the vertical plane") for name in names) == 2


@pytest.mark.slow
def test_jacobi_identities_at_quick_resolution():
    result = check_jacobi_identities(QUICK)
    assert len(result.rows) == 4
    assert all(row["tolerance"] == QUICK.jacobi_tolerance for row in result.rows)
    assert result.passed
