"""
Uniform parameter grids and fourth-order finite differences.

``ScalarFieldGrid`` stores node values on a rectangle, boundary nodes included.
The stencils below are central in the interior and one-sided (still fourth
order) on the two rows next to each edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid

from .errors import ContractViolationError, NumericalError, ResolutionError

Rectangle = tuple[float, float, float, float]

# machine-epsilon^(1/5), the step used for analytic-field differentiation
FD_STEP = float(np.finfo(float).eps ** 0.2)

_D1_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D1_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
_D2_EDGE0 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_D2_EDGE1 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0


def _apply(stencil: np.ndarray, f: np.ndarray, start: int) -> np.ndarray:
    return sum(c * f[start + k] for k, c in enumerate(stencil) if c != 0.0)


def fd4_first(values: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Fourth-order first derivative of sampled values along ``axis``."""
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = f.shape[0]
    if n < 5:
        raise ResolutionError(f"need at least 5 nodes along axis {axis}, got {n}")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    out[0] = _apply(_D1_EDGE0, f, 0) / h
    out[1] = _apply(_D1_EDGE1, f, 0) / h
    fr = f[::-1]
    out[-1] = -_apply(_D1_EDGE0, fr, 0) / h
    out[-2] = -_apply(_D1_EDGE1, fr, 0) / h
    return np.moveaxis(out, 0, axis)


def fd4_second(values: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Fourth-order second derivative of sampled values along ``axis``."""
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = f.shape[0]
    if n < 6:
        raise ResolutionError(f"need at least 6 nodes along axis {axis}, got {n}")
    h2 = h * h
    out = np.empty_like(f)
    out[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h2)
    out[0] = _apply(_D2_EDGE0, f, 0) / h2
    out[1] = _apply(_D2_EDGE1, f, 0) / h2
    fr = f[::-1]
    out[-1] = _apply(_D2_EDGE0, fr, 0) / h2
    out[-2] = _apply(_D2_EDGE1, fr, 0) / h2
    return np.moveaxis(out, 0, axis)


def central_derivative(fun: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    """Fourth-order central derivative at 0 of a one-parameter family."""
    values = [np.asarray(fun(k * h), dtype=float) for k in (-2, -1, 1, 2)]
    d = (values[0] - 8.0 * values[1] + 8.0 * values[2] - values[3]) / (12.0 * h)
    if not np.all(np.isfinite(d)):
        raise NumericalError("non-finite values while differentiating a field")
    return d


def node_coordinates(rect: Rectangle, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Node coordinates (boundary included) of a uniform grid on ``rect``."""
    s0, s1, t0, t1 = rect
    return np.linspace(s0, s1, shape[0]), np.linspace(t0, t1, shape[1])


@dataclass(frozen=True, eq=False)
class ScalarFieldGrid:
    """Real values on a uniform grid over ``rect = (s0, s1, t0, t1)``.

    ``values[i, j]`` sits at ``(s[i], t[j])``; boundary nodes are included.
    """

    values: np.ndarray
    rect: Rectangle

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ContractViolationError("ScalarFieldGrid values must be two-dimensional")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, fun: Callable[[np.ndarray, np.ndarray], np.ndarray], rect: Rectangle,
                      shape: tuple[int, int]) -> "ScalarFieldGrid":
        s, t = node_coordinates(rect, shape)
        S, T = np.meshgrid(s, t, indexing="ij")
        return cls(np.broadcast_to(fun(S, T), S.shape).astype(float), rect)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def spacing(self) -> tuple[float, float]:
        s0, s1, t0, t1 = self.rect
        ns, nt = self.shape
        return (s1 - s0) / (ns - 1), (t1 - t0) / (nt - 1)

    @property
    def s(self) -> np.ndarray:
        return node_coordinates(self.rect, self.shape)[0]

    @property
    def t(self) -> np.ndarray:
        return node_coordinates(self.rect, self.shape)[1]

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.s, self.t, indexing="ij")

    def with_values(self, values: np.ndarray) -> "ScalarFieldGrid":
        return ScalarFieldGrid(values, self.rect)

    def boundary_values(self) -> np.ndarray:
        v = self.values
        return np.concatenate([v[0, :], v[-1, :], v[1:-1, 0], v[1:-1, -1]])

    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]

    def derivative(self, axis: int, order: int = 1) -> np.ndarray:
        h = self.spacing[axis]
        if order == 1:
            return fd4_first(self.values, h, axis)
        if order == 2:
            return fd4_second(self.values, h, axis)
        raise ValueError("order must be 1 or 2")

    def gradient(self) -> tuple[np.ndarray, np.ndarray]:
        return self.derivative(0), self.derivative(1)

    def gradient_norm_sq(self, inverse_metric: np.ndarray | None = None) -> np.ndarray:
        """|grad f|^2 with respect to ``inverse_metric`` (shape (ns, nt, 2, 2)); flat if None."""
        fs, ft = self.gradient()
        if inverse_metric is None:
            return fs ** 2 + ft ** 2
        gi = inverse_metric
        return gi[..., 0, 0] * fs ** 2 + 2.0 * gi[..., 0, 1] * fs * ft + gi[..., 1, 1] * ft ** 2

    def integrate(self, density: np.ndarray | None = None) -> float:
        """Trapezoidal integral of the values times ``density`` (e.g. sqrt(det g))."""
        f = self.values if density is None else self.values * density
        return float(trapezoid(trapezoid(f, self.s, axis=0), self.t))

    def l2_norm(self, density: np.ndarray | None = None) -> float:
        return float(np.sqrt(self.with_values(self.values ** 2).integrate(density)))
