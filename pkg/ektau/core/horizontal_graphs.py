"""
Horizontal minimal graphs in Nil3 = E(0, 1/2).

The graph of u over a domain of the (y, z)-plane along the Killing field X is
F(y, z) = (u, y, z + y u / 2); it is minimal iff

    [1 + 2y u_z + (1+y^2) u_z^2] u_yy - 2 u_y [y + (1+y^2) u_z] u_yz
        + [1 + (1+y^2) u_y^2] u_zz - u_y u_z (1 + y u_z) = 0.

Grid functions are discretized with second-order central differences; the
Dirichlet problem is solved by damped Newton iteration with the exact Jacobian
of the discrete system.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import spsolve

from .errors import ContractViolationError, DegeneracyError, SolverError
from .grids import Rectangle, node_coordinates
from .space import SpaceParams, to_frame
from .surfaces import (
    Immersion,
    fmp_surface,
    fundamental_forms,
    horizontal_graph_immersion,
    jacobi_candidates,
)

logger = logging.getLogger(__name__)

NIL = SpaceParams(0.0, 0.5)
NEWTON_TOL = 1e-8
MAX_NEWTON = 200
ARMIJO_FLOOR = 2.0 ** -10

ClosedForm = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, ...]]


@dataclass(frozen=True, eq=False)
class GraphFunction:
    """u over the rectangle ``rect = (y0, y1, z0, z1)``, sampled on ``shape`` nodes (boundary included).

    Closed-form functions carry exact derivatives (u, u_y, u_z, u_yy, u_yz, u_zz).
    """

    rect: Rectangle
    shape: tuple[int, int]
    values: np.ndarray
    closed_form: ClosedForm | None = None
    name: str = "u"
    solver: dict | None = None

    @classmethod
    def from_closed_form(cls, fun: ClosedForm, rect: Rectangle, shape: tuple[int, int] = (65, 65),
                         name: str = "u") -> "GraphFunction":
        Y, Z = np.meshgrid(*node_coordinates(rect, shape), indexing="ij")
        values = np.broadcast_to(fun(Y, Z)[0], Y.shape).astype(float)
        return cls(rect, tuple(shape), values, fun, name)

    @classmethod
    def from_grid(cls, values: np.ndarray, rect: Rectangle, name: str = "u") -> "GraphFunction":
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or min(values.shape) < 3:
            raise ContractViolationError("grid functions need at least 3x3 nodes")
        return cls(rect, values.shape, values, None, name)

    @property
    def spacing(self) -> tuple[float, float]:
        y0, y1, z0, z1 = self.rect
        return (y1 - y0) / (self.shape[0] - 1), (z1 - z0) / (self.shape[1] - 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(*node_coordinates(self.rect, self.shape), indexing="ij")

    def derivatives(self) -> tuple[np.ndarray, ...]:
        """(u_y, u_z, u_yy, u_yz, u_zz) on interior nodes."""
        if self.closed_form is not None:
            Y, Z = self.mesh()
            parts = self.closed_form(Y[1:-1, 1:-1], Z[1:-1, 1:-1])
            return tuple(np.broadcast_to(p, Y[1:-1, 1:-1].shape).astype(float) for p in parts[1:])
        return central_differences(self.values, *self.spacing)

    def as_immersion(self, sp: SpaceParams = NIL) -> Immersion:
        """The graph surface Sigma_u."""
        if self.closed_form is not None:
            return horizontal_graph_immersion(sp, self.closed_form, self.rect, name=f"graph({self.name})")
        Y, Z = self.mesh()
        xyz = np.stack([self.values, Y, Z + sp.tau * Y * self.values], -1)
        y, z = node_coordinates(self.rect, self.shape)
        return Immersion.from_samples(sp, y, z, xyz, name=f"graph({self.name})")


def central_differences(u: np.ndarray, hy: float, hz: float) -> tuple[np.ndarray, ...]:
    """Second-order (u_y, u_z, u_yy, u_yz, u_zz) at interior nodes."""
    c = u[1:-1, 1:-1]
    uy = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * hy)
    uz = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * hz)
    uyy = (u[2:, 1:-1] - 2.0 * c + u[:-2, 1:-1]) / hy ** 2
    uzz = (u[1:-1, 2:] - 2.0 * c + u[1:-1, :-2]) / hz ** 2
    uyz = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4.0 * hy * hz)
    return uy, uz, uyy, uyz, uzz


def pde_coefficients(y, uy, uz):
    """Coefficients (A, B, C, D) of A u_yy - B u_yz + C u_zz - D."""
    w = 1.0 + y * y
    a = 1.0 + 2.0 * y * uz + w * uz ** 2
    b = 2.0 * uy * (y + w * uz)
    c = 1.0 + w * uy ** 2
    d = uy * uz * (1.0 + y * uz)
    return a, b, c, d


def pde_operator(y, uy, uz, uyy, uyz, uzz) -> np.ndarray:
    a, b, c, d = pde_coefficients(y, uy, uz)
    return a * uyy - b * uyz + c * uzz - d


@dataclass(frozen=True, eq=False)
class PdeResidual:
    values: np.ndarray
    l2: float
    sup: float


def residual(gf: GraphFunction) -> PdeResidual:
    """Left side of the minimal-graph equation at interior nodes."""
    Y, _ = gf.mesh()
    r = pde_operator(Y[1:-1, 1:-1], *gf.derivatives())
    hy, hz = gf.spacing
    return PdeResidual(r, float(np.sqrt(np.sum(r ** 2) * hy * hz)), float(np.max(np.abs(r))) if r.size else 0.0)


@dataclass(frozen=True)
class ConsistencyReport:
    max_abs_h: float
    sign_agreement: float | None
    small_residual_nodes: int
    other_nodes: int
    excluded: int


def consistency_vs_mean_curvature(gf: GraphFunction, tol: float = 1e-8) -> ConsistencyReport:
    """Compare the PDE residual with the mean curvature of Sigma_u at interior nodes.

    ``max_abs_h`` is max |H| where |residual| < tol; ``sign_agreement`` is the share of
    the remaining nodes where residual and H have the same sign.
    """
    res = residual(gf).values
    Y, Z = gf.mesh()
    y, z = Y[1:-1, 1:-1], Z[1:-1, 1:-1]
    imm = gf.as_immersion()
    jet = imm.jet(y, z)
    ws, wt = to_frame(NIL, jet.F, jet.F_s), to_frame(NIL, jet.F, jet.F_t)
    sv = np.linalg.svd(np.stack([ws, wt], -1), compute_uv=False)
    good = sv[..., 1] > 1e-10 * np.maximum(sv[..., 0], 1.0)
    h = np.full(y.shape, np.nan)
    if good.any():
        h[good] = fundamental_forms(imm, y[good], z[good], intrinsic=False).H
    small = good & (np.abs(res) < tol)
    other = good & ~small
    max_h = float(np.max(np.abs(h[small]))) if small.any() else 0.0
    agreement = float(np.mean(np.sign(res[other]) == np.sign(h[other]))) if other.any() else None
    return ConsistencyReport(max_h, agreement, int(small.sum()), int(other.sum()), int((~good).sum()))


# -- Dirichlet problem ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Boundary samples (y, z, g), e.g. read from a CSV trace."""

    y: np.ndarray
    z: np.ndarray
    g: np.ndarray


BoundaryData = Union[Callable[[np.ndarray, np.ndarray], np.ndarray], BoundaryTrace]


def _edge_values(trace: BoundaryTrace, fixed: np.ndarray, free: np.ndarray, at: float, nodes: np.ndarray,
                 atol: float) -> np.ndarray:
    on_edge = np.abs(fixed - at) <= atol
    if on_edge.sum() < 2:
        raise ContractViolationError(f"boundary trace has fewer than two samples on the edge at {at:g}")
    order = np.argsort(free[on_edge])
    g = np.asarray(trace.g, dtype=float)
    return np.interp(nodes, free[on_edge][order], g[on_edge][order])


def boundary_grid(rect: Rectangle, shape: tuple[int, int], g: BoundaryData) -> np.ndarray:
    """Full node array with boundary values from ``g`` and zeros inside."""
    y, z = node_coordinates(rect, shape)
    out = np.zeros(shape)
    if isinstance(g, BoundaryTrace):
        atol = 1e-9 * max(1.0, *(abs(v) for v in rect))
        ty, tz = np.asarray(g.y, float), np.asarray(g.z, float)
        out[0, :] = _edge_values(g, ty, tz, rect[0], z, atol)
        out[-1, :] = _edge_values(g, ty, tz, rect[1], z, atol)
        out[:, 0] = _edge_values(g, tz, ty, rect[2], y, atol)
        out[:, -1] = _edge_values(g, tz, ty, rect[3], y, atol)
        return out
    Y, Z = np.meshgrid(y, z, indexing="ij")
    values = np.broadcast_to(g(Y, Z), Y.shape)
    out[0, :], out[-1, :] = values[0, :], values[-1, :]
    out[:, 0], out[:, -1] = values[:, 0], values[:, -1]
    return out


def coons_extension(boundary: np.ndarray) -> np.ndarray:
    """Transfinite (Coons) interpolation of the boundary rows into the interior."""
    b = np.asarray(boundary, dtype=float)
    ny, nz = b.shape
    s = np.linspace(0.0, 1.0, ny)[:, None]
    t = np.linspace(0.0, 1.0, nz)[None, :]
    ruled_s = (1.0 - s) * b[0:1, :] + s * b[-1:, :]
    ruled_t = (1.0 - t) * b[:, 0:1] + t * b[:, -1:]
    corners = ((1.0 - s) * (1.0 - t) * b[0, 0] + s * (1.0 - t) * b[-1, 0]
               + (1.0 - s) * t * b[0, -1] + s * t * b[-1, -1])
    out = ruled_s + ruled_t - corners
    out[0, :], out[-1, :], out[:, 0], out[:, -1] = b[0, :], b[-1, :], b[:, 0], b[:, -1]
    return out


def _difference_operators(n: int, h: float):
    first = sparse.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1], shape=(n, n)) / (2.0 * h)
    second = sparse.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], shape=(n, n)) / h ** 2
    return first, second


def jacobian(u: np.ndarray, rect: Rectangle) -> sparse.csc_matrix:
    """Derivative of the discrete residual with respect to the interior values."""
    ny, nz = u.shape
    hy = (rect[1] - rect[0]) / (ny - 1)
    hz = (rect[3] - rect[2]) / (nz - 1)
    y = node_coordinates(rect, u.shape)[0][1:-1, None]
    uy, uz, uyy, uyz, uzz = central_differences(u, hy, hz)
    a, b, c, _ = pde_coefficients(y, uy, uz)
    w = 1.0 + y * y
    r_uy = -2.0 * (y + w * uz) * uyz + 2.0 * w * uy * uzz - uz * (1.0 + y * uz)
    r_uz = (2.0 * y + 2.0 * w * uz) * uyy - 2.0 * uy * w * uyz - uy * (1.0 + 2.0 * y * uz)

    d1y, d2y = _difference_operators(ny - 2, hy)
    d1z, d2z = _difference_operators(nz - 2, hz)
    iy, iz = sparse.identity(ny - 2), sparse.identity(nz - 2)
    diag = lambda v: sparse.diags(np.broadcast_to(v, uy.shape).ravel())
    J = (diag(a) @ sparse.kron(d2y, iz) - diag(b) @ sparse.kron(d1y, d1z) + diag(c) @ sparse.kron(iy, d2z)
         + diag(r_uy) @ sparse.kron(d1y, iz) + diag(r_uz) @ sparse.kron(iy, d1z))
    return J.tocsc()


def _residual_grid(u: np.ndarray, rect: Rectangle) -> np.ndarray:
    ny, nz = u.shape
    hy = (rect[1] - rect[0]) / (ny - 1)
    hz = (rect[3] - rect[2]) / (nz - 1)
    y = node_coordinates(rect, u.shape)[0][1:-1, None]
    return pde_operator(y, *central_differences(u, hy, hz))


def solve_dirichlet(rect: Rectangle, boundary: BoundaryData, u0: np.ndarray | None = None,
                    shape: tuple[int, int] = (33, 33), tol: float = NEWTON_TOL,
                    max_iter: int = MAX_NEWTON) -> GraphFunction:
    """Minimal horizontal graph with the given boundary values, by damped Newton.

    ``u0`` (any extension of the boundary data) defaults to the Coons extension.
    The returned GraphFunction carries the iteration record in ``solver``.
    """
    bnd = boundary_grid(rect, shape, boundary)
    if u0 is None:
        u = coons_extension(bnd)
    else:
        u = np.array(u0, dtype=float)
        if u.shape != tuple(shape):
            raise ContractViolationError(f"initial guess has shape {u.shape}, expected {tuple(shape)}")
        u[0, :], u[-1, :], u[:, 0], u[:, -1] = bnd[0, :], bnd[-1, :], bnd[:, 0], bnd[:, -1]

    sup_history: list[float] = []
    l2_history: list[float] = []
    steps: list[float] = []
    for it in range(max_iter + 1):
        r = _residual_grid(u, rect).ravel()
        sup_history.append(float(np.max(np.abs(r))))
        l2_history.append(float(np.linalg.norm(r)))
        logger.debug("Newton %d: sup residual %.3e", it, sup_history[-1])
        if sup_history[-1] < tol:
            break
        if it == max_iter:
            raise SolverError(f"Newton did not converge in {max_iter} iterations", sup_history)
        delta = spsolve(jacobian(u, rect), -r)
        if not np.all(np.isfinite(delta)):
            raise SolverError("singular Jacobian in the Newton step", sup_history)
        step = 1.0
        while True:
            trial = u.copy()
            trial[1:-1, 1:-1] += step * delta.reshape(trial[1:-1, 1:-1].shape)
            norm = float(np.linalg.norm(_residual_grid(trial, rect)))
            if norm <= (1.0 - 1e-4 * step) * l2_history[-1] or step <= ARMIJO_FLOOR:
                break
            step *= 0.5
        steps.append(step)
        u = trial

    gf = GraphFunction.from_grid(u, rect)
    margin = graph_margin(gf)
    if not (math.isfinite(margin) and margin > 0.0):
        raise DegeneracyError("solution lost the graph property (<eta, X> vanishes)", (margin,))
    logger.info("Dirichlet problem solved in %d Newton steps, sup residual %.3e", len(steps), sup_history[-1])
    return replace(gf, solver={
        "iterations": len(steps),
        "residual_sup": sup_history,
        "residual_l2": l2_history,
        "steps": steps,
        "min_eta_x": margin,
    })


def graph_margin(gf: GraphFunction) -> float:
    """min |<eta, X>| over interior nodes of Sigma_u."""
    Y, Z = gf.mesh()
    imm = gf.as_immersion()
    values = jacobi_candidates(imm, Y[1:-1, 1:-1], Z[1:-1, 1:-1], alphas=())["X"]
    return float(np.min(np.abs(values)))


def newton_rate(history) -> float | None:
    """Final-step residual ratio r_k / r_(k-1)."""
    if len(history) < 2 or history[-2] == 0.0:
        return None
    return float(history[-1] / history[-2])


# -- exact solutions -----------------------------------------------------------------


def plane_solution(a: float, b: float, rect: Rectangle = (-1.0, 1.0, -1.0, 1.0),
                   shape: tuple[int, int] = (65, 65)) -> GraphFunction:
    """u = a y + b, the vertical plane Pi_{a,b}."""

    def fun(y, z):
        zero = np.zeros_like(y)
        return a * y + b, np.full_like(y, a), zero, zero, zero, zero

    return GraphFunction.from_closed_form(fun, rect, shape, name=f"{a:g}y+{b:g}")


def vertical_solution(c: float, d: float, rect: Rectangle = (-1.0, 1.0, -1.0, 1.0),
                      shape: tuple[int, int] = (65, 65)) -> GraphFunction:
    """u = c z + d, an entire horizontal minimal graph."""

    def fun(y, z):
        zero = np.zeros_like(y)
        return c * z + d, zero, np.full_like(y, c), zero, zero, zero

    return GraphFunction.from_closed_form(fun, rect, shape, name=f"{c:g}z+{d:g}")


def vertical_graph_height(c: float, d: float) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """The graph of u = c z + d written as z = x y / 2 + (x - d) / c."""
    if c == 0.0:
        raise ContractViolationError("u = d is the vertical plane Pi_{0,d}, not a vertical graph")
    return lambda x, y: 0.5 * x * y + (x - d) / c


# -- tangency of X_alpha to M_theta --------------------------------------------------


@dataclass(frozen=True, eq=False)
class TangencyCurve:
    theta: float
    alpha: float
    verdict: str
    y: np.ndarray
    x: np.ndarray | None
    z: np.ndarray | None
    on_curve_max: float
    off_curve_min: float


def fmp_tangency_curve(theta: float, alpha: float, y_range: tuple[float, float] = (-2.0, 2.0),
                       n: int = 201, offset: float = 0.5) -> TangencyCurve:
    """Curve of M_theta along which X_alpha is tangent, x = -sinh(2 theta) sqrt(1+y^2).

    For sin(alpha) = 0 the field X_alpha = +-T1 is tangent everywhere and no curve is returned.
    """
    imm = fmp_surface(theta)
    y = np.linspace(*y_range, n)
    inner = lambda xs: np.abs(jacobi_candidates(imm, xs, y, alphas=(alpha,))["X_alpha"][float(alpha)])
    if abs(math.sin(alpha)) < 1e-12:
        xs = np.linspace(-2.0, 2.0, 9)[:, None] + 0.0 * y
        values = np.abs(jacobi_candidates(imm, xs, y + 0.0 * xs, alphas=(alpha,))["X_alpha"][float(alpha)])
        return TangencyCurve(theta, alpha, "tangent everywhere", y, None, None, float(values.max()), 0.0)
    x = -math.sinh(2.0 * theta) * np.sqrt(1.0 + y * y)
    z = imm(x, y)[..., 2]
    on = float(inner(x).max())
    off = float(min(inner(x + offset).min(), inner(x - offset).min()))
    return TangencyCurve(theta, alpha, "tangent along curve", y, x, z, on, off)
