import math

import numpy as np
import pytest

from ektau.core.errors import ChartDomainError, DegeneracyError, UnsupportedSpaceError
from ektau.core.space import SpaceParams
from ektau.core.surfaces import (
    Immersion,
    ambient_sectional_curvature,
    cylinder_immersion,
    fmp_surface,
    fundamental_forms,
    gauss_residual,
    horizontal_graph_immersion,
    horizontal_slice,
    jacobi_candidates,
    multigraph_margin,
    pinch,
    potential_identity_residual,
    potential_q,
    potential_qtilde,
    principal_curvatures,
    tangency_determinant,
    vertical_plane,
)


def _params(n=5, rect=(0.0, 1.0, 0.0, 1.0)):
    return np.meshgrid(np.linspace(rect[0], rect[1], n), np.linspace(rect[2], rect[3], n), indexing="ij")


def test_nil_cylinder_values(nil):
    s, t = _params()
    forms = fundamental_forms(cylinder_immersion(nil, 1.0), s, t)
    np.testing.assert_allclose(forms.H, 0.5, atol=1e-8)
    np.testing.assert_allclose(forms.K, 0.0, atol=1e-6)
    np.testing.assert_allclose(forms.K_ext, -0.25, atol=1e-8)
    np.testing.assert_allclose(forms.angle, 0.0, atol=1e-12)


@pytest.mark.parametrize("k", [0.0, 0.5, 1.0])
def test_cylinder_second_form(space, k):
    s, t = _params()
    forms = fundamental_forms(cylinder_immersion(space, k), s, t)
    np.testing.assert_allclose(forms.first, np.broadcast_to(np.eye(2), forms.first.shape), atol=1e-12)
    expected = np.array([[k, space.tau], [space.tau, 0.0]])
    np.testing.assert_allclose(forms.second, np.broadcast_to(expected, forms.second.shape), atol=1e-8)
    np.testing.assert_allclose(np.abs(gauss_residual(forms)), 0.0, atol=1e-6)


def test_cylinder_potential_and_pinch(space):
    k = 0.5
    s, t = _params()
    imm = cylinder_immersion(space, k)
    np.testing.assert_allclose(potential_q(imm, s, t), k * k + space.kappa, atol=1e-8)
    forms = fundamental_forms(imm, s, t, intrinsic=False)
    np.testing.assert_allclose(pinch(forms), k * k / 4.0 + space.tau ** 2, atol=1e-8)
    k1, k2 = principal_curvatures(forms)
    np.testing.assert_allclose(k1 + k2, 2.0 * forms.H, atol=1e-12)


def test_great_circle_leaves_the_chart():
    with pytest.raises(ChartDomainError):
        cylinder_immersion(SpaceParams(1.0, 0.0), 0.0, (0.0, 4.0, 0.0, 1.0))
    # the short arc stays inside
    cylinder_immersion(SpaceParams(1.0, 0.0), 0.0, (0.0, 1.0, 0.0, 1.0))


def test_swapping_parameters_flips_the_normal(space):
    s, t = _params(3)
    imm = cylinder_immersion(space, 1.0)
    a = fundamental_forms(imm, s, t, intrinsic=False)
    b = fundamental_forms(imm.swapped(), t, s, intrinsic=False)
    np.testing.assert_allclose(b.normal_frame, -a.normal_frame, atol=1e-12)
    np.testing.assert_allclose(b.H, -a.H, atol=1e-10)
    np.testing.assert_allclose(potential_q(imm.swapped(), t, s), potential_q(imm, s, t), atol=1e-10)


def test_swapping_parameters_keeps_both_curvatures():
    x, y = _params(9, (-1.0, 1.0, -1.0, 1.0))
    imm = fmp_surface(0.5)
    a = fundamental_forms(imm, x, y)
    b = fundamental_forms(imm.swapped(), y, x)
    assert np.max(np.abs(a.K_ext)) > 1e-3
    np.testing.assert_allclose(b.K, a.K, atol=1e-8)
    np.testing.assert_allclose(b.K_ext, a.K_ext, atol=1e-10)


@pytest.mark.parametrize("theta", [0.0, 0.5, 1.0])
def test_fmp_surfaces_are_minimal(theta):
    x, y = _params(41, (-1.0, 1.0, -1.0, 1.0))
    forms = fundamental_forms(fmp_surface(theta), x, y, intrinsic=False)
    assert np.max(np.abs(forms.H)) < 1e-8


@pytest.mark.parametrize("theta", [0.0, 1.0])
def test_potential_identity_on_fmp(theta):
    x, y = _params(41, (-1.0, 1.0, -1.0, 1.0))
    assert np.max(np.abs(potential_identity_residual(fmp_surface(theta), x, y))) < 1e-6


def test_qtilde_differs_from_q_by_gauss_curvature(nil):
    x, y = _params(9, (-1.0, 1.0, -1.0, 1.0))
    imm = fmp_surface(0.5)
    forms = fundamental_forms(imm, x, y)
    np.testing.assert_allclose(potential_qtilde(imm, x, y) - forms.K, potential_q(imm, x, y), atol=1e-6)


@pytest.mark.parametrize("theta,alpha", [(0.0, math.pi / 4), (0.0, math.pi / 2), (1.0, math.pi / 4), (1.0, math.pi / 2)])
def test_tangency_determinant_closed_form(theta, alpha):
    x, y = _params(101, (-2.0, 2.0, -2.0, 2.0))
    det = tangency_determinant(theta, alpha, x, y)
    closed = -math.sin(alpha) * (x + math.sinh(2.0 * theta) * np.sqrt(1.0 + y * y))
    assert np.max(np.abs(det - closed)) < 1e-8


def test_jacobi_candidates_on_nil(nil):
    s, t = _params()
    out = jacobi_candidates(vertical_plane(nil, 1.0, 0.5), s, t)
    np.testing.assert_allclose(out["eta3"], 0.0, atol=1e-12)
    assert set(out["X_alpha"]) == {math.pi / 4, math.pi / 2}
    assert np.all(np.abs(out["X"]) > 0.0)


def test_jacobi_candidates_off_nil_only_give_the_angle():
    s, t = _params()
    out = jacobi_candidates(cylinder_immersion(SpaceParams(-1.0, 0.5), 1.0), s, t)
    assert set(out) == {"eta3"}


def test_multigraph_margin(nil):
    s, t = _params(9, (-1.0, 1.0, -1.0, 1.0))
    assert multigraph_margin(vertical_plane(nil, 0.5, 0.0), s, t) > 0.1
    # X is tangent to M_0 everywhere
    assert multigraph_margin(fmp_surface(0.0), s, t) < 1e-12


def test_horizontal_slice_of_a_product_space():
    s, t = _params()
    forms = fundamental_forms(horizontal_slice(SpaceParams(-1.0, 0.0), 0.3), s, t)
    np.testing.assert_allclose(np.abs(forms.angle), 1.0, atol=1e-12)
    np.testing.assert_allclose(forms.H, 0.0, atol=1e-12)
    # totally geodesic copy of the hyperbolic plane
    np.testing.assert_allclose(forms.K, -1.0, atol=1e-6)


def test_horizontal_graphs_need_nil():
    with pytest.raises(UnsupportedSpaceError):
        vertical_plane(SpaceParams(-1.0, 0.5), 1.0, 0.0)


def test_horizontal_graph_of_cz_plus_d_is_minimal(nil):
    def u(y, z):
        zero = np.zeros_like(y)
        return 2.0 * z - 1.0, zero, np.full_like(y, 2.0), zero, zero, zero

    y, z = _params(9, (-1.0, 1.0, -1.0, 1.0))
    forms = fundamental_forms(horizontal_graph_immersion(nil, u, (-1.0, 1.0, -1.0, 1.0)), y, z, intrinsic=False)
    assert np.max(np.abs(forms.H)) < 1e-10


def test_sampled_cylinder_matches_closed_form(nil):
    imm = cylinder_immersion(nil, 1.0)
    s = np.linspace(0.0, 1.0, 41)
    t = np.linspace(0.0, 1.0, 41)
    S, T = np.meshgrid(s, t, indexing="ij")
    sampled = Immersion.from_samples(nil, s, t, imm(S, T))
    inner = (slice(4, -4), slice(4, -4))
    forms = fundamental_forms(sampled, S[inner], T[inner])
    np.testing.assert_allclose(forms.H, 0.5, atol=1e-5)
    np.testing.assert_allclose(forms.K, 0.0, atol=1e-4)


def test_rank_drop_is_reported(nil):
    s = np.linspace(0.0, 1.0, 9)
    t = np.linspace(0.0, 1.0, 9)
    xyz = np.zeros((9, 9, 3))
    xyz[..., 0] = s[:, None]
    imm = Immersion.from_samples(nil, s, t, xyz)
    S, T = np.meshgrid(s, t, indexing="ij")
    with pytest.raises(DegeneracyError) as err:
        fundamental_forms(imm, S, T)
    assert err.value.singular_values[1] == pytest.approx(0.0, abs=1e-12)


def test_ambient_curvature_of_tangent_planes(space):
    s, t = _params(5, (-0.5, 0.5, -0.5, 0.5))
    forms = fundamental_forms(horizontal_slice(space, 0.2), s, t, intrinsic=False)
    nu = forms.angle
    expected = space.tau ** 2 + (space.kappa - 4.0 * space.tau ** 2) * nu ** 2
    np.testing.assert_allclose(ambient_sectional_curvature(forms), expected, atol=1e-8)
