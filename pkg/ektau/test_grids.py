import math

import numpy as np
import pytest

from ektau.core.errors import ContractViolationError, NumericalError, ResolutionError
from ektau.core.grids import ScalarFieldGrid, central_derivative, fd4_first, fd4_second


def test_stencils_are_exact_on_quartics():
    x = np.linspace(-1.0, 2.0, 13)
    h = x[1] - x[0]
    f = 3.0 * x ** 4 - x ** 3 + 2.0 * x
    np.testing.assert_allclose(fd4_first(f, h), 12.0 * x ** 3 - 3.0 * x ** 2 + 2.0, atol=1e-9)
    np.testing.assert_allclose(fd4_second(f, h), 36.0 * x ** 2 - 6.0 * x, atol=1e-8)


def test_stencils_act_along_the_requested_axis():
    s = np.linspace(0.0, 1.0, 9)
    values = np.tile(s ** 2, (4, 1))
    np.testing.assert_allclose(fd4_first(values, s[1] - s[0], axis=1), np.tile(2.0 * s, (4, 1)), atol=1e-12)


def test_short_axes_are_refused():
    with pytest.raises(ResolutionError):
        fd4_first(np.zeros(4), 0.1)
    with pytest.raises(ResolutionError):
        fd4_second(np.zeros(5), 0.1)


def test_central_derivative_rejects_non_finite_values():
    assert central_derivative(lambda t: np.array([math.sin(t)]), 1e-3)[0] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(NumericalError):
        central_derivative(lambda t: np.array([1.0 / t if t > 0 else np.inf]), 1e-3)


def test_scalar_field_grid():
    f = ScalarFieldGrid.from_function(lambda s, t: s * t, (0.0, 1.0, 0.0, 2.0), (5, 9))
    assert f.shape == (5, 9)
    assert f.spacing == (0.25, 0.25)
    assert f.integrate() == pytest.approx(1.0)
    assert f.boundary_values().size == 2 * 9 + 2 * 3
    fs, ft = f.gradient()
    S, T = f.mesh()
    np.testing.assert_allclose(fs, T, atol=1e-12)
    np.testing.assert_allclose(ft, S, atol=1e-12)
    with pytest.raises(ContractViolationError):
        ScalarFieldGrid(np.zeros(3), (0.0, 1.0, 0.0, 1.0))
