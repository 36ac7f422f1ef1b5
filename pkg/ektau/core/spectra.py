"""
Stability operator L = Delta + q on parameter rectangles with zero boundary values.

The discretization is the energy form of the Laplace-Beltrami operator,

    S = h_s h_t (Ds^T A_s Ds + Dt^T A_t Dt + Cs^T A_st Ct + Ct^T A_st Cs),

with A_s = sqrt(g) g^11 and A_t = sqrt(g) g^22 averaged on cell faces and the
mixed coefficient sqrt(g) g^12 averaged on cells (absent for orthogonal
parametrizations, leaving the 5-point stencil). With the lumped mass
M = h_s h_t diag(sqrt(g)) the quadratic form is Q(f) = f^T (S - M_q) f and
L f = -M^-1 (S - M_q) f, so Q(f) = -<f, L f>_M holds exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import splu
from scipy.stats import linregress

from .errors import ContractViolationError, ResolutionError, SolverError
from .grids import Rectangle, ScalarFieldGrid, fd4_first, node_coordinates
from .space import SpaceParams
from .surfaces import Immersion, cylinder_immersion, first_form, fundamental_forms

logger = logging.getLogger(__name__)

MIN_GRID = 16
RAYLEIGH_TOL = 1e-10
RESIDUAL_TOL = 1e-6
MAX_ITERATIONS = 500
MARGINAL_FACTOR = 1e-3


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    """Discretized Delta + q on ``rect`` with ``grid`` interior nodes per direction.

    Metric data and the potential are stored on the full node grid, boundary included.
    """

    rect: Rectangle
    grid: tuple[int, int]
    sqrt_g: np.ndarray
    inverse_metric: np.ndarray
    q: np.ndarray
    name: str = "problem"
    meta: dict = field(default_factory=dict)

    @classmethod
    def flat(cls, rect: Rectangle, grid: tuple[int, int], potential: float | np.ndarray = 0.0) -> "SpectralProblem":
        shape = (grid[0] + 2, grid[1] + 2)
        g_inv = np.zeros(shape + (2, 2))
        g_inv[..., 0, 0] = g_inv[..., 1, 1] = 1.0
        q = np.broadcast_to(np.asarray(potential, dtype=float), shape).copy()
        return cls(rect, tuple(grid), np.ones(shape), g_inv, q, name="flat")

    @classmethod
    def from_immersion(cls, imm: Immersion, rect: Rectangle | None = None,
                       grid: tuple[int, int] = (64, 64)) -> "SpectralProblem":
        rect = rect or imm.rect
        s, t = node_coordinates(rect, (grid[0] + 2, grid[1] + 2))
        S, T = np.meshgrid(s, t, indexing="ij")
        forms = fundamental_forms(imm, S, T, intrinsic=False)
        I = forms.first
        q = forms.A_norm_sq + forms.ricci_normal
        logger.debug("assembled %s on %s with %s interior nodes", imm.name, rect, grid)
        return cls(rect, tuple(grid), np.sqrt(np.linalg.det(I)), np.linalg.inv(I), q,
                   name=imm.name, meta=dict(imm.params))

    def laplacian_only(self) -> "SpectralProblem":
        return SpectralProblem(self.rect, self.grid, self.sqrt_g, self.inverse_metric,
                               np.zeros_like(self.q), f"{self.name}[laplacian]", dict(self.meta))

    @property
    def spacing(self) -> tuple[float, float]:
        s0, s1, t0, t1 = self.rect
        return (s1 - s0) / (self.grid[0] + 1), (t1 - t0) / (self.grid[1] + 1)

    @property
    def node_shape(self) -> tuple[int, int]:
        return self.grid[0] + 2, self.grid[1] + 2

    @property
    def is_orthogonal(self) -> bool:
        return bool(np.max(np.abs(self.inverse_metric[..., 0, 1])) == 0.0)

    def _face_coefficients(self):
        a_s = self.sqrt_g * self.inverse_metric[..., 0, 0]
        a_t = self.sqrt_g * self.inverse_metric[..., 1, 1]
        a_st = self.sqrt_g * self.inverse_metric[..., 0, 1]
        face_s = 0.5 * (a_s[:-1, :] + a_s[1:, :])
        face_t = 0.5 * (a_t[:, :-1] + a_t[:, 1:])
        cell = 0.25 * (a_st[:-1, :-1] + a_st[1:, :-1] + a_st[:-1, 1:] + a_st[1:, 1:])
        return face_s, face_t, cell

    @cached_property
    def _interior_columns(self) -> np.ndarray:
        ns, nt = self.node_shape
        idx = np.arange(ns * nt).reshape(ns, nt)
        return idx[1:-1, 1:-1].ravel()

    @cached_property
    def stiffness(self) -> sparse.csr_matrix:
        ns, nt = self.node_shape
        hs, ht = self.spacing
        face_s, face_t, cell = self._face_coefficients()
        d_s = sparse.diags([-np.ones(ns - 1), np.ones(ns - 1)], [0, 1], shape=(ns - 1, ns)) / hs
        d_t = sparse.diags([-np.ones(nt - 1), np.ones(nt - 1)], [0, 1], shape=(nt - 1, nt)) / ht
        cols = self._interior_columns
        Ds = sparse.kron(d_s, sparse.identity(nt)).tocsr()[:, cols]
        Dt = sparse.kron(sparse.identity(ns), d_t).tocsr()[:, cols]
        S = Ds.T @ sparse.diags(face_s.ravel()) @ Ds + Dt.T @ sparse.diags(face_t.ravel()) @ Dt
        if not self.is_orthogonal:
            avg_s = sparse.diags([0.5 * np.ones(ns - 1), 0.5 * np.ones(ns - 1)], [0, 1], shape=(ns - 1, ns))
            avg_t = sparse.diags([0.5 * np.ones(nt - 1), 0.5 * np.ones(nt - 1)], [0, 1], shape=(nt - 1, nt))
            Cs = sparse.kron(d_s, avg_t).tocsr()[:, cols]
            Ct = sparse.kron(avg_s, d_t).tocsr()[:, cols]
            A = sparse.diags(cell.ravel())
            S = S + Cs.T @ A @ Ct + Ct.T @ A @ Cs
        return (hs * ht * S).tocsr()

    @cached_property
    def mass(self) -> np.ndarray:
        hs, ht = self.spacing
        return hs * ht * self.sqrt_g[1:-1, 1:-1].ravel()

    @cached_property
    def potential_mass(self) -> np.ndarray:
        return self.mass * self.q[1:-1, 1:-1].ravel()

    @property
    def form_matrix(self) -> sparse.csr_matrix:
        """S - M_q, the matrix of Q on interior values."""
        return (self.stiffness - sparse.diags(self.potential_mass)).tocsr()

    def interior_values(self, f: ScalarFieldGrid) -> np.ndarray:
        if f.shape != self.node_shape:
            raise ContractViolationError(f"field has shape {f.shape}, expected {self.node_shape}")
        scale = max(1.0, float(np.max(np.abs(f.values))))
        if np.max(np.abs(f.boundary_values())) > 1e-12 * scale:
            raise ContractViolationError("test functions must vanish on the boundary of the rectangle")
        return f.interior().ravel()

    def full_grid(self, interior: np.ndarray) -> ScalarFieldGrid:
        values = np.zeros(self.node_shape)
        values[1:-1, 1:-1] = interior.reshape(self.grid)
        return ScalarFieldGrid(values, self.rect)


def quadratic_form(problem: SpectralProblem, f: ScalarFieldGrid) -> float:
    """Q(f, f) = int |grad f|^2 - q f^2, computed face by face from the gradient."""
    problem.interior_values(f)
    v = f.values
    hs, ht = problem.spacing
    face_s, face_t, cell = problem._face_coefficients()
    fs = np.diff(v, axis=0) / hs
    ft = np.diff(v, axis=1) / ht
    energy = np.sum(face_s * fs ** 2) + np.sum(face_t * ft ** 2)
    if not problem.is_orthogonal:
        cs = 0.5 * (fs[:, :-1] + fs[:, 1:])
        ct = 0.5 * (ft[:-1, :] + ft[1:, :])
        energy += 2.0 * np.sum(cell * cs * ct)
    potential = np.sum((problem.q * problem.sqrt_g * v ** 2)[1:-1, 1:-1])
    return float(hs * ht * (energy - potential))


def apply_operator(problem: SpectralProblem, f: ScalarFieldGrid) -> ScalarFieldGrid:
    """Discrete L f = -M^-1 (S - M_q) f, zero on the boundary."""
    x = problem.interior_values(f)
    return problem.full_grid(-(problem.form_matrix @ x) / problem.mass)


def inner_product(problem: SpectralProblem, f: ScalarFieldGrid, g: ScalarFieldGrid) -> float:
    """Discrete L^2 product with the lumped mass."""
    return float(np.sum(problem.mass * f.interior().ravel() * g.interior().ravel()))


@dataclass(frozen=True, eq=False)
class SpectralResult:
    lambda1: float
    eigenfunction: ScalarFieldGrid
    iterations: int
    residual: float
    history: list[float] = field(default_factory=list)


def first_eigenvalue(problem: SpectralProblem, tol: float = RAYLEIGH_TOL,
                     max_iter: int = MAX_ITERATIONS) -> SpectralResult:
    """Smallest Dirichlet eigenvalue of -L by shifted inverse iteration.

    The shift sits strictly below lambda1 (lambda1 > -max q), so the iteration
    converges to the first mode from the positive start vector.
    """
    if min(problem.grid) < MIN_GRID:
        raise ResolutionError(f"grid {problem.grid} is below the minimum {MIN_GRID}x{MIN_GRID}")
    s0, s1, t0, t1 = problem.rect
    side = max(s1 - s0, t1 - t0)
    shift = -float(np.max(problem.q[1:-1, 1:-1])) - 0.1 / side ** 2

    d = 1.0 / np.sqrt(problem.mass)
    D = sparse.diags(d)
    B = (D @ problem.form_matrix @ D).tocsc()
    lu = splu((B - shift * sparse.identity(B.shape[0], format="csc")).tocsc())

    v = np.ones(B.shape[0]) / math.sqrt(B.shape[0])
    rho = float(v @ (B @ v))
    history: list[float] = []
    for it in range(1, max_iter + 1):
        y = lu.solve(v)
        if not np.all(np.isfinite(y)):
            raise SolverError("inverse iteration produced non-finite values", history)
        v = y / np.linalg.norm(y)
        Bv = B @ v
        rho_new = float(v @ Bv)
        res = float(np.linalg.norm(Bv - rho_new * v))
        history.append(res)
        scale = max(1.0, abs(rho_new))
        converged = abs(rho_new - rho) < tol * scale and res < RESIDUAL_TOL * scale
        rho = rho_new
        logger.debug("inverse iteration %d: rho=%.12g residual=%.3e", it, rho, res)
        if converged:
            break
    else:
        raise SolverError(f"inverse iteration did not converge in {max_iter} iterations", history)

    f = d * v
    if f.sum() < 0:
        f = -f
    logger.info("lambda1(%s) = %.10g after %d iterations", problem.name, rho, it)
    return SpectralResult(rho, problem.full_grid(f), it, history[-1], history)


def lambda1_formula(sp: SpaceParams, k_gamma: float, a: float, b: float) -> float:
    """pi^2 (1/a^2 + 1/b^2) - (k^2 + kappa) for the rectangle [0,a]x[0,b] of a cylinder."""
    return math.pi ** 2 * (1.0 / a ** 2 + 1.0 / b ** 2) - (k_gamma ** 2 + sp.kappa)


def stable_h_threshold(sp: SpaceParams) -> float:
    """(tau^2 - kappa)/3, the H^2 threshold of the nonexistence results for stable H-surfaces."""
    return (sp.tau ** 2 - sp.kappa) / 3.0


def cylinder_mean_curvature_bound(sp: SpaceParams) -> float:
    """-kappa/4: stable vertical cylinders have H^2 <= -kappa/4."""
    return -sp.kappa / 4.0


def cylinder_eigenvalue(kappa: float, tau: float, k_gamma: float, a: float, b: float, grid: int) -> dict:
    """lambda1 of the cylinder rectangle [0,a]x[0,b]; module-level so worker pools can pickle it."""
    sp = SpaceParams(kappa, tau)
    imm = cylinder_immersion(sp, k_gamma, (0.0, a, 0.0, b))
    result = first_eigenvalue(SpectralProblem.from_immersion(imm, grid=(grid, grid)))
    return {
        "a": a,
        "b": b,
        "lambda1": result.lambda1,
        "formula": lambda1_formula(sp, k_gamma, a, b),
        "iterations": result.iterations,
        "residual": result.residual,
    }


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: str
    witness: tuple[float, float] | None
    rows: list[dict]
    intercept: float
    intercept_stderr: float
    slope: float
    band: float
    expected_infimum: float
    stable_h_threshold: float
    mean_curvature_bound: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": list(self.witness) if self.witness else None,
            "intercept": self.intercept,
            "intercept_stderr": self.intercept_stderr,
            "slope": self.slope,
            "band": self.band,
            "expected_infimum": self.expected_infimum,
            "stable_h_threshold": self.stable_h_threshold,
            "mean_curvature_bound": self.mean_curvature_bound,
        }


def classify_sweep(sp: SpaceParams, k_gamma: float, rows: Sequence[dict]) -> StabilityVerdict:
    """Verdict from a finished sweep of rectangles (rows in sweep order).

    lambda1 is fitted against 1/a^2 + 1/b^2; the intercept estimates the infimum over
    large rectangles. A sweep is stable only when intercept - stderr clears the band.
    Otherwise, when no rectangle is a witness, it is marginal.
    """
    if len(rows) < 2:
        raise ContractViolationError("a stability sweep needs at least two rectangles")
    side = max(max(r["a"], r["b"]) for r in rows)
    band = MARGINAL_FACTOR / side ** 2
    witness = next(((r["a"], r["b"]) for r in rows if r["lambda1"] < -band), None)

    x = np.array([1.0 / r["a"] ** 2 + 1.0 / r["b"] ** 2 for r in rows])
    y = np.array([r["lambda1"] for r in rows])
    if np.ptp(x) > 0:
        fit = linregress(x, y)
        slope, intercept = float(fit.slope), float(fit.intercept)
        stderr = float(fit.intercept_stderr) if len(rows) > 2 else 0.0
    else:
        slope, intercept, stderr = float("nan"), float(np.min(y)), 0.0

    if witness is not None:
        verdict = "unstable"
    elif intercept - stderr > band:
        verdict = "stable"
    else:
        verdict = "marginal"
        logger.warning("cylinder k=%g in E(%g,%g): lambda1 infimum %.3e +- %.1e overlaps the marginal band %.1e",
                       k_gamma, sp.kappa, sp.tau, intercept, stderr, band)
    return StabilityVerdict(
        verdict=verdict,
        witness=witness,
        rows=list(rows),
        intercept=intercept,
        intercept_stderr=stderr,
        slope=slope,
        band=band,
        expected_infimum=-(k_gamma ** 2 + sp.kappa),
        stable_h_threshold=stable_h_threshold(sp),
        mean_curvature_bound=cylinder_mean_curvature_bound(sp),
    )


def cylinder_stability_verdict(sp: SpaceParams, k_gamma: float, domain_sweep: Sequence[tuple[float, float]],
                               grid: int = 48,
                               mapper: Callable | None = None) -> StabilityVerdict:
    """Stable / unstable(witness) / marginal for the cylinder over a curve of curvature k_gamma.

    ``mapper`` (e.g. an executor's ``map``) may evaluate the rectangles in parallel;
    results keep the sweep order.
    """
    mapper = mapper or map
    n = len(domain_sweep)
    rows = list(mapper(cylinder_eigenvalue, [sp.kappa] * n, [sp.tau] * n, [k_gamma] * n,
                       [float(a) for a, _ in domain_sweep], [float(b) for _, b in domain_sweep], [grid] * n))
    return classify_sweep(sp, k_gamma, rows)


# -- Jacobi functions -----------------------------------------------------------------


def _node_geometry(imm: Immersion, u: ScalarFieldGrid):
    S, T = u.mesh()
    forms = fundamental_forms(imm, S, T, intrinsic=False)
    I = forms.first
    return np.sqrt(np.linalg.det(I)), np.linalg.inv(I), forms.A_norm_sq + forms.ricci_normal


def _laplacian(u: ScalarFieldGrid, sqrt_g: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """(1/sqrt g) d_i (sqrt g g^ij d_j u), fourth order."""
    hs, ht = u.spacing
    us, ut = u.gradient()
    flux_s = sqrt_g * (g_inv[..., 0, 0] * us + g_inv[..., 0, 1] * ut)
    flux_t = sqrt_g * (g_inv[..., 1, 0] * us + g_inv[..., 1, 1] * ut)
    return (fd4_first(flux_s, hs, 0) + fd4_first(flux_t, ht, 1)) / sqrt_g


def jacobi_operator(imm: Immersion, u: ScalarFieldGrid) -> ScalarFieldGrid:
    """L u = Delta u + q u on the immersion's parameter grid."""
    sqrt_g, g_inv, q = _node_geometry(imm, u)
    return u.with_values(_laplacian(u, sqrt_g, g_inv) + q * u.values)


def jacobi_residual(imm: Immersion, u: ScalarFieldGrid) -> float:
    """Discrete L^2 norm of Delta u + q u."""
    sqrt_g, g_inv, q = _node_geometry(imm, u)
    lu = u.with_values(_laplacian(u, sqrt_g, g_inv) + q * u.values)
    return lu.l2_norm(sqrt_g)


def composite_identity_residual(imm: Immersion, u: ScalarFieldGrid, f: Callable, df: Callable,
                                d2f: Callable) -> float:
    """|| L(f(u)) - [f''(u)|grad u|^2 + q (f(u) - f'(u) u)] || for a Jacobi function u."""
    sqrt_g, g_inv, q = _node_geometry(imm, u)
    fu = u.with_values(f(u.values))
    lhs = _laplacian(fu, sqrt_g, g_inv) + q * fu.values
    rhs = d2f(u.values) * u.gradient_norm_sq(g_inv) + q * (fu.values - df(u.values) * u.values)
    return u.with_values(lhs - rhs).l2_norm(sqrt_g)
