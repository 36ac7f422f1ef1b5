"""
Cutoff energies, the Jacobi-pair estimate chain and volume growth on model surfaces.

Model surfaces are rotational metrics dr^2 + f(r)^2 dtheta^2 (the flat cylinder is
f = circumference / 2pi with r the axial coordinate). Cutoffs are radial: 1 on
r <= r_j, a taper on [r_j, R_j], 0 beyond.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sparse
from scipy.integrate import cumulative_trapezoid, quad
from scipy.sparse.csgraph import dijkstra
from scipy.stats import linregress

from .errors import ChainViolationError, ContractViolationError, PreconditionError, ResolutionError
from .grids import FD_STEP

logger = logging.getLogger(__name__)

MIN_RADIAL_NODES = 64
TAPERS = ("log", "linear", "harmonic")
QUADRATIC_EXPONENT_LIMIT = 2.25
# chain terms count as tending to zero when the last is at most this share of the first
DECAY_FRACTION = 0.5


@dataclass(frozen=True, eq=False)
class RotationalModel:
    """Metric dr^2 + f(r)^2 dtheta^2 on r >= 0, theta in [0, 2pi)."""

    name: str
    profile: Callable[[np.ndarray], np.ndarray]

    def circumference(self, r) -> np.ndarray:
        return 2.0 * math.pi * self.profile(np.asarray(r, dtype=float))


def flat_plane() -> RotationalModel:
    return RotationalModel("plane", lambda r: np.asarray(r, dtype=float))


def flat_cylinder(circumference: float = 2.0 * math.pi) -> RotationalModel:
    c = float(circumference) / (2.0 * math.pi)
    return RotationalModel(f"cylinder(c={circumference:g})", lambda r: np.full_like(np.asarray(r, float), c))


def hyperbolic_plane(curvature: float = -1.0) -> RotationalModel:
    k = math.sqrt(-curvature)
    return RotationalModel(f"hyperbolic(K={curvature:g})", lambda r: np.sinh(k * np.asarray(r, float)) / k)


@dataclass(frozen=True, eq=False)
class CutoffFamily:
    """Radial cutoffs phi_j on a model surface; ``radii[j-1] = (r_j, R_j)``."""

    surface: RotationalModel
    radii: tuple[tuple[float, float], ...]
    taper: str = "log"
    radial_nodes: int = 256

    def __post_init__(self):
        if self.taper not in TAPERS:
            raise ContractViolationError(f"unknown taper '{self.taper}', expected one of {TAPERS}")
        object.__setattr__(self, "radii", tuple((float(r), float(R)) for r, R in self.radii))

    @classmethod
    def log_family(cls, surface: RotationalModel, r0: float = 1.0, count: int = 8,
                   radial_nodes: int = 256) -> "CutoffFamily":
        """R_j = e^j r0, the exhaustion used for the plane."""
        return cls(surface, tuple((r0, r0 * math.exp(j)) for j in range(1, count + 1)), "log", radial_nodes)

    def __len__(self) -> int:
        return len(self.radii)

    def bounds(self, j: int) -> tuple[float, float]:
        if not 1 <= j <= len(self.radii):
            raise ContractViolationError(f"cutoff index {j} outside 1..{len(self.radii)}")
        r, R = self.radii[j - 1]
        if not (math.isfinite(R) and R > r >= 0.0):
            raise ContractViolationError(
                f"phi_{j} has no taper on [{r}, {R}]; a constant cutoff is not compactly supported"
            )
        return r, R

    def slope(self, j: int, r: np.ndarray) -> np.ndarray:
        """phi_j'(r) on the taper (the cutoff decreases from 1 to 0)."""
        r0, R = self.bounds(j)
        r = np.asarray(r, dtype=float)
        if self.taper == "linear":
            return np.full_like(r, -1.0 / (R - r0))
        if self.taper == "log":
            if r0 <= 0.0:
                raise ContractViolationError("the log taper needs r_j > 0")
            return -1.0 / (r * math.log(R / r0))
        norm, _ = quad(lambda x: 1.0 / float(self.surface.profile(np.array(x))), r0, R)
        return -1.0 / (self.surface.profile(r) * norm)

    def value(self, j: int, r: np.ndarray) -> np.ndarray:
        """phi_j(r)."""
        r0, R = self.bounds(j)
        r = np.asarray(r, dtype=float)
        inside = np.clip(r, r0, R)
        if self.taper == "linear":
            phi = (R - inside) / (R - r0)
        elif self.taper == "log":
            phi = np.log(R / inside) / math.log(R / r0)
        else:
            nodes = np.linspace(r0, R, 4097)
            cum = cumulative_trapezoid(1.0 / self.surface.profile(nodes), nodes, initial=0.0)
            phi = 1.0 - np.interp(inside, nodes, cum) / cum[-1]
        return np.where(r <= r0, 1.0, np.where(r >= R, 0.0, phi))


def radial_nodes(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoints and weights on [a, b], log-stretched r = a (b/a)^sigma when a > 0."""
    mid = (np.arange(n) + 0.5) / n
    if a > 0.0:
        ratio = math.log(b / a)
        r = a * np.exp(ratio * mid)
        return r, r * ratio / n
    return a + (b - a) * mid, np.full(n, (b - a) / n)


def cutoff_energy(family: CutoffFamily, j: int) -> float:
    """E(phi_j) = int |grad phi_j|^2 dA = 2pi int phi_j'^2 f dr."""
    if family.radial_nodes < MIN_RADIAL_NODES:
        raise ResolutionError(
            f"annulus resolved by {family.radial_nodes} radial nodes, need at least {MIN_RADIAL_NODES}"
        )
    r0, R = family.bounds(j)
    r, w = radial_nodes(r0, R, family.radial_nodes)
    return float(2.0 * math.pi * np.sum(family.slope(j, r) ** 2 * family.surface.profile(r) * w))


def capacity_minimality(surface: RotationalModel, r: float, R: float, radial_nodes: int = 512) -> dict:
    """Energies of every taper on the annulus [r, R]; the harmonic one realizes the capacity."""
    energies = {
        kind: cutoff_energy(CutoffFamily(surface, ((r, R),), kind, radial_nodes), 1) for kind in TAPERS
    }
    return {"energies": energies, "minimizer": min(energies, key=energies.get)}


def energy_scaling_exponent(family: CutoffFamily) -> float:
    """Slope of log E(phi_j) against log ln(R_j/r_j); -1 for the plane."""
    widths = [math.log(R / r) for r, R in family.radii]
    energies = [cutoff_energy(family, j) for j in range(1, len(family) + 1)]
    return float(linregress(np.log(widths), np.log(energies)).slope)


# -- estimate chain ---------------------------------------------------------------------

PolarField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class ChainReport:
    rows: list[dict] = field(default_factory=list)
    hypothesis_holds: bool = True
    hypothesis_minimum: float = 0.0
    ratio_variance: float = 0.0
    ratio_constant: bool = False
    sup_u2: float = 0.0
    trend_to_zero: bool | None = None

    @property
    def non_jacobi(self) -> bool:
        return not self.hypothesis_holds


def _polar_grid(family: CutoffFamily, n_theta: int):
    """Midpoint nodes aligned with every r_j and R_j so indicator integrals are exact."""
    edges = sorted({0.0, *(r for r, _ in family.radii), *(R for _, R in family.radii)})
    rs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        r, w = radial_nodes(a, b, family.radial_nodes)
        rs.append(r)
        ws.append(w)
    r = np.concatenate(rs)
    w = np.concatenate(ws)
    theta = (np.arange(n_theta) + 0.5) * (2.0 * math.pi / n_theta)
    return r, w, theta


def _partial(fun: PolarField, r: np.ndarray, th: np.ndarray, axis: int) -> np.ndarray:
    h = FD_STEP * np.maximum(1.0, np.abs(r)) if axis == 0 else FD_STEP
    shifted = []
    for k in (-2, -1, 1, 2):
        shifted.append(fun(r + k * h, th) if axis == 0 else fun(r, th + k * h))
    return (shifted[0] - 8.0 * shifted[1] + 8.0 * shifted[2] - shifted[3]) / (12.0 * h)


def decays_to_zero(values: Sequence[float], fraction: float = DECAY_FRACTION) -> bool:
    """Non-increasing (up to rounding) with the last term at most ``fraction`` of the first."""
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        raise ContractViolationError("a decay trend needs at least two terms")
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    monotone = bool(np.all(np.diff(values) <= 1e-12 * scale))
    return monotone and bool(values[-1] <= fraction * values[0])


def estimate_chain_check(surface: RotationalModel, u: PolarField, v: PolarField, family: CutoffFamily,
                         n_theta: int = 128, tolerance: float = 1e-6) -> ChainReport:
    """Evaluate the estimate chain for the pair (u, v) along a cutoff family.

    For each j: inner = int_{Omega_j} v^2 |grad(u/v)|^2, outer = int_{annulus} phi_j^2
    v^2 |grad(u/v)|^2, the middle bound 2 sqrt(C E(phi_j)) sqrt(outer) and the final bound
    4 C E(phi_j), with C the sup of u^2 over the window. The chain holds whenever
    u div(v^2 grad(u/v)) >= 0; if that hypothesis fails, u is flagged non-Jacobi and
    violations are reported rather than raised.
    """
    r, w, theta = _polar_grid(family, n_theta)
    R, TH = np.meshgrid(r, theta, indexing="ij")
    f = surface.profile(R)
    dA = f * w[:, None] * (2.0 * math.pi / n_theta)

    v_values = v(R, TH)
    if np.any(v_values <= 0.0):
        raise PreconditionError("v must be positive on the whole window")
    u_values = u(R, TH)
    ratio = lambda rr, tt: u(rr, tt) / v(rr, tt)
    w_r = _partial(ratio, R, TH, 0)
    w_t = _partial(ratio, R, TH, 1)
    density = v_values ** 2 * (w_r ** 2 + (w_t / f) ** 2)

    # u div(v^2 grad(u/v)) in polar form
    flux_r = lambda rr, tt: surface.profile(rr) * v(rr, tt) ** 2 * _partial(ratio, rr, tt, 0)
    flux_t = lambda rr, tt: v(rr, tt) ** 2 * _partial(ratio, rr, tt, 1) / surface.profile(rr)
    div = (_partial(flux_r, R, TH, 0) + _partial(flux_t, R, TH, 1)) / f
    hyp = u_values * div
    hyp_scale = max(1.0, float(np.max(np.abs(u_values))) ** 2)
    hypothesis_min = float(np.min(hyp))
    holds = hypothesis_min >= -1e-6 * hyp_scale

    c = float(np.max(u_values ** 2))
    report = ChainReport(hypothesis_holds=holds, hypothesis_minimum=hypothesis_min, sup_u2=c)
    ratio_values = u_values / v_values
    report.ratio_variance = float(np.var(ratio_values))
    report.ratio_constant = report.ratio_variance < 1e-12

    for j in range(1, len(family) + 1):
        r0, R1 = family.bounds(j)
        phi = family.value(j, R)
        inner = float(np.sum((density * dA)[r <= r0]))
        annulus = (r > r0) & (r < R1)
        outer = float(np.sum((phi ** 2 * density * dA)[annulus]))
        energy = cutoff_energy(family, j)
        middle = 2.0 * math.sqrt(c * energy) * math.sqrt(outer)
        final = 4.0 * c * energy
        total = inner + outer
        slack = tolerance * max(1.0, total)
        row = {
            "j": j, "r_j": r0, "R_j": R1, "energy": energy,
            "inner": inner, "outer": outer, "middle_bound": middle, "final_bound": final,
            "middle_holds": total <= middle + slack,
            "final_holds": total <= final + slack,
        }
        report.rows.append(row)
        if holds and not (row["middle_holds"] and row["final_holds"]):
            raise ChainViolationError(
                f"estimate chain violated at j={j}: {total:.6g} vs {middle:.6g} / {final:.6g}"
            )
    if not holds:
        logger.info("hypothesis u div(v^2 grad(u/v)) >= 0 fails (min %.3e): u is not a Jacobi function",
                    hypothesis_min)
    if len(report.rows) > 1:
        report.trend_to_zero = (decays_to_zero([row["energy"] for row in report.rows])
                                and decays_to_zero([row["final_bound"] for row in report.rows]))
    return report


# -- volume growth ----------------------------------------------------------------------

_NEIGHBOURS = [(1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)]


@dataclass(frozen=True, eq=False)
class MetricGrid:
    """Chart window with metric coefficients at nodes; axis 1 may be periodic."""

    x: np.ndarray
    y: np.ndarray
    metric: np.ndarray
    name: str = "metric_grid"
    periodic_y: bool = False
    mask: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.x), len(self.y)

    @property
    def valid(self) -> np.ndarray:
        return np.ones(self.shape, dtype=bool) if self.mask is None else self.mask

    @classmethod
    def plane(cls, half_width: float = 10.0, n: int = 201) -> "MetricGrid":
        x = np.linspace(-half_width, half_width, n)
        g = np.zeros((n, n, 2, 2))
        g[..., 0, 0] = g[..., 1, 1] = 1.0
        return cls(x, x.copy(), g, name="plane")

    @classmethod
    def cylinder(cls, circumference: float = 1.0, half_length: float = 20.0, n_axial: int = 401,
                 n_around: int = 20) -> "MetricGrid":
        x = np.linspace(-half_length, half_length, n_axial)
        y = np.arange(n_around) * (circumference / n_around)
        g = np.zeros((n_axial, n_around, 2, 2))
        g[..., 0, 0] = g[..., 1, 1] = 1.0
        return cls(x, y, g, name=f"cylinder(c={circumference:g})", periodic_y=True)

    @classmethod
    def hyperbolic_disk(cls, chart_radius: float = 1.9, n: int = 241) -> "MetricGrid":
        """Curvature -1 in the chart lambda^2 |dx|^2, lambda = 1/(1 - r^2/4)."""
        x = np.linspace(-chart_radius, chart_radius, n)
        X, Y = np.meshgrid(x, x, indexing="ij")
        r2 = X ** 2 + Y ** 2
        mask = r2 < chart_radius ** 2
        lam2 = np.where(mask, 1.0 / np.maximum(1.0 - r2 / 4.0, 1e-12) ** 2, 0.0)
        g = np.zeros((n, n, 2, 2))
        g[..., 0, 0] = g[..., 1, 1] = lam2
        return cls(x, x.copy(), g, name="hyperbolic", mask=mask)

    def cell_areas(self) -> np.ndarray:
        dx, dy = self.x[1] - self.x[0], self.y[1] - self.y[0]
        area = np.sqrt(np.maximum(np.linalg.det(self.metric), 0.0)) * dx * dy
        return np.where(self.valid, area, 0.0)

    def graph(self) -> sparse.csr_matrix:
        """16-neighbour graph weighted by metric edge lengths."""
        nx, ny = self.shape
        dx, dy = self.x[1] - self.x[0], self.y[1] - self.y[0]
        idx = np.arange(nx * ny).reshape(nx, ny)
        valid = self.valid
        rows, cols, vals = [], [], []
        for di, dj in _NEIGHBOURS:
            i0, i1 = max(0, -di), nx - max(0, di)
            a = idx[i0:i1]
            b = idx[i0 + di:i1 + di]
            g_a = self.metric[i0:i1]
            g_b = self.metric[i0 + di:i1 + di]
            ok_a, ok_b = valid[i0:i1], valid[i0 + di:i1 + di]
            if self.periodic_y:
                b, g_b, ok_b = (np.roll(arr, -dj, axis=1) for arr in (b, g_b, ok_b))
            else:
                j0, j1 = max(0, -dj), ny - max(0, dj)
                a, g_a, ok_a = a[:, j0:j1], g_a[:, j0:j1], ok_a[:, j0:j1]
                b, g_b, ok_b = b[:, j0 + dj:j1 + dj], g_b[:, j0 + dj:j1 + dj], ok_b[:, j0 + dj:j1 + dj]
            d = np.array([di * dx, dj * dy])
            gm = 0.5 * (g_a + g_b)
            length = np.sqrt(np.einsum("...ij,i,j->...", gm, d, d))
            keep = ok_a & ok_b
            rows.append(a[keep])
            cols.append(b[keep])
            vals.append(length[keep])
        rows, cols, vals = (np.concatenate(v) for v in (rows, cols, vals))
        n = nx * ny
        g = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))
        return (g + g.T).tocsr()

    def boundary(self) -> np.ndarray:
        """Valid nodes touching the window edge or an invalid node."""
        valid = self.valid
        edge = np.zeros(self.shape, dtype=bool)
        edge[0, :] = edge[-1, :] = True
        if not self.periodic_y:
            edge[:, 0] = edge[:, -1] = True
        invalid = ~valid
        near_invalid = (np.roll(invalid, 1, 0) | np.roll(invalid, -1, 0)
                        | np.roll(invalid, 1, 1) | np.roll(invalid, -1, 1))
        return valid & (edge | near_invalid)


@dataclass
class GrowthReport:
    base_point: tuple[float, float]
    radii: np.ndarray
    volumes: np.ndarray
    exponent: float
    truncated: bool

    @property
    def ratios(self) -> np.ndarray:
        return self.volumes / self.radii ** 2

    @property
    def at_most_quadratic(self) -> bool:
        return bool(self.exponent <= QUADRATIC_EXPONENT_LIMIT)

    def rows(self) -> list[dict]:
        return [
            {"r": float(r), "vol": float(v), "ratio": float(q)}
            for r, v, q in zip(self.radii, self.volumes, self.ratios)
        ]


def area_growth(surface: MetricGrid, p0: tuple[float, float], radii: Sequence[float]) -> GrowthReport:
    """Volumes of geodesic balls B(p0, r) from graph distances and cell areas."""
    radii = np.asarray(sorted(float(r) for r in radii))
    i = int(np.argmin(np.abs(surface.x - p0[0])))
    j = int(np.argmin(np.abs(surface.y - p0[1])))
    source = i * surface.shape[1] + j
    dist = dijkstra(surface.graph(), directed=False, indices=source).reshape(surface.shape)
    areas = surface.cell_areas()
    volumes = np.array([float(np.sum(areas[dist <= r])) for r in radii])

    reach = float(np.min(dist[surface.boundary()]))
    truncated = bool(radii[-1] > reach)
    if truncated:
        logger.warning("radius %.4g exceeds the window (boundary at distance %.4g) on %s; volumes truncated",
                       radii[-1], reach, surface.name)
    outer = radii >= np.median(radii)
    exponent = float(linregress(np.log(radii[outer]), np.log(volumes[outer])).slope) if outer.sum() > 1 else float("nan")
    return GrowthReport((float(surface.x[i]), float(surface.y[j])), radii, volumes, exponent, truncated)
