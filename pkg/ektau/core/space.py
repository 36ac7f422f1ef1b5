"""
Ambient geometry of the homogeneous spaces E(kappa, tau).

Chart: the set {1 + (kappa/4)(x^2+y^2) > 0} with metric

    lambda^2 (dx^2 + dy^2) + (dz + tau*lambda*(y dx - x dy))^2,
    lambda = 1 / (1 + (kappa/4)(x^2+y^2)),

and the orthonormal chart frame E1 = mu*dx - tau*y*dz, E2 = mu*dy + tau*x*dz,
E3 = dz (mu = 1/lambda). All functions accept a single point or an array of
points with trailing dimension 3, and return arrays shaped accordingly.
Frame components always refer to the chart frame unless noted otherwise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import ChartDomainError, ConfigError, NumericalError, UnsupportedSpaceError
from .grids import FD_STEP, central_derivative

logger = logging.getLogger(__name__)

# 1 + (kappa/4) r^2 must stay above this for a point to count as inside the chart
CHART_MARGIN = 1e-12


@dataclass(frozen=True)
class SpaceParams:
    """The pair (kappa, tau) selecting E(kappa, tau); sigma is derived."""

    kappa: float
    tau: float

    def __post_init__(self):
        kappa, tau = float(self.kappa), float(self.tau)
        if not (math.isfinite(kappa) and math.isfinite(tau)):
            raise UnsupportedSpaceError("kappa and tau must be finite")
        if math.isclose(kappa, 4.0 * tau * tau, rel_tol=0.0, abs_tol=1e-12):
            raise UnsupportedSpaceError(
                f"kappa = 4 tau^2 is a space form (kappa={kappa}, tau={tau})"
            )
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "tau", tau)

    @property
    def sigma(self) -> float:
        return 0.0 if self.tau == 0.0 else self.kappa / (2.0 * self.tau)

    @property
    def is_nil(self) -> bool:
        return self.kappa == 0.0

    @classmethod
    def nil3(cls, tau: float = 0.5) -> "SpaceParams":
        return cls(0.0, tau)

    @classmethod
    def from_dict(cls, data: Mapping) -> "SpaceParams":
        """Parse ``{"kappa": ..., "tau": ...}``; sigma is never accepted."""
        if "sigma" in data:
            raise ConfigError("sigma is derived from kappa and tau", field="sigma")
        for key in ("kappa", "tau"):
            if key not in data:
                raise ConfigError("missing space parameter", field=key)
            if isinstance(data[key], bool) or not isinstance(data[key], (int, float)):
                raise ConfigError("space parameters must be real numbers", field=key)
        extra = set(data) - {"kappa", "tau"}
        if extra:
            raise ConfigError("unknown space parameter", field=sorted(extra)[0])
        try:
            return cls(data["kappa"], data["tau"])
        except UnsupportedSpaceError as e:
            raise ConfigError(str(e), field="kappa") from e

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "tau": self.tau, "sigma": self.sigma}


@dataclass(frozen=True)
class AmbientPoint:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent vector given by its components in the chart basis (dx, dy, dz)."""

    base: AmbientPoint
    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float).reshape(3)
        if not np.all(np.isfinite(c)):
            raise NumericalError("tangent vector components must be finite")
        object.__setattr__(self, "components", c)


def _coords(p) -> np.ndarray:
    if isinstance(p, AmbientPoint):
        return p.as_array()
    if isinstance(p, TangentVector):
        return p.base.as_array()
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 3:
        raise ValueError("points need a trailing dimension of size 3")
    return arr


def _components(v) -> np.ndarray:
    if isinstance(v, TangentVector):
        return v.components
    return np.asarray(v, dtype=float)


def chart_mu(sp: SpaceParams, p) -> np.ndarray:
    """mu = 1 + (kappa/4)(x^2+y^2); raises if the point leaves the chart."""
    q = _coords(p)
    mu = 1.0 + 0.25 * sp.kappa * (q[..., 0] ** 2 + q[..., 1] ** 2)
    if np.any(~np.isfinite(q)) or np.any(mu <= CHART_MARGIN):
        raise ChartDomainError(
            f"point outside the chart 1 + (kappa/4)(x^2+y^2) > 0 for kappa={sp.kappa}"
        )
    return mu


def chart_conformal_factor(sp: SpaceParams, p) -> np.ndarray:
    """lambda = 1 / (1 + (kappa/4)(x^2+y^2))."""
    return 1.0 / chart_mu(sp, p)


def vertical_projection(p) -> np.ndarray:
    """The fibration pi(x, y, z) = (x, y)."""
    return _coords(p)[..., :2].copy()


def metric_at(sp: SpaceParams, p) -> np.ndarray:
    """Metric coefficients g_ij in the chart basis."""
    q = _coords(p)
    lam = chart_conformal_factor(sp, q)
    x, y = q[..., 0], q[..., 1]
    omega = np.stack([sp.tau * lam * y, -sp.tau * lam * x, np.ones_like(x)], axis=-1)
    g = omega[..., :, None] * omega[..., None, :]
    g[..., 0, 0] += lam ** 2
    g[..., 1, 1] += lam ** 2
    return g


def frame_matrix(sp: SpaceParams, p) -> np.ndarray:
    """Chart components of (E1, E2, E3) as the columns of a 3x3 matrix."""
    q = _coords(p)
    mu = chart_mu(sp, q)
    x, y = q[..., 0], q[..., 1]
    m = np.zeros(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = mu
    m[..., 2, 0] = -sp.tau * y
    m[..., 1, 1] = mu
    m[..., 2, 1] = sp.tau * x
    m[..., 2, 2] = 1.0
    return m


def frame_at(sp: SpaceParams, p: AmbientPoint) -> tuple[TangentVector, TangentVector, TangentVector]:
    """The orthonormal frame (E1, E2, E3) at a single point."""
    base = p if isinstance(p, AmbientPoint) else AmbientPoint(*_coords(p))
    m = frame_matrix(sp, base)
    return tuple(TangentVector(base, m[:, i]) for i in range(3))


def to_frame(sp: SpaceParams, p, v) -> np.ndarray:
    """Frame components (w1, w2, w3) of chart components v."""
    q = _coords(p)
    v = _components(v)
    lam = chart_conformal_factor(sp, q)
    x, y = q[..., 0], q[..., 1]
    w = np.empty(np.broadcast(q, v).shape)
    w[..., 0] = lam * v[..., 0]
    w[..., 1] = lam * v[..., 1]
    w[..., 2] = sp.tau * lam * (y * v[..., 0] - x * v[..., 1]) + v[..., 2]
    return w


def to_frame_derivatives(sp: SpaceParams, p) -> tuple[np.ndarray, np.ndarray]:
    """x- and y-derivatives of the chart-to-frame matrix (it does not depend on z)."""
    q = _coords(p)
    lam = chart_conformal_factor(sp, q)
    x, y = q[..., 0], q[..., 1]
    lam_x = -lam ** 2 * 0.5 * sp.kappa * x
    lam_y = -lam ** 2 * 0.5 * sp.kappa * y
    tau = sp.tau
    dx = np.zeros(q.shape[:-1] + (3, 3))
    dy = np.zeros(q.shape[:-1] + (3, 3))
    dx[..., 0, 0] = dx[..., 1, 1] = lam_x
    dx[..., 2, 0] = tau * y * lam_x
    dx[..., 2, 1] = -tau * (lam + x * lam_x)
    dy[..., 0, 0] = dy[..., 1, 1] = lam_y
    dy[..., 2, 0] = tau * (lam + y * lam_y)
    dy[..., 2, 1] = -tau * x * lam_y
    return dx, dy


def from_frame(sp: SpaceParams, p, w) -> np.ndarray:
    """Chart components of the vector with frame components w."""
    m = frame_matrix(sp, p)
    return np.einsum("...ij,...j->...i", m, _components(w))


def inner(sp: SpaceParams, p, u, v) -> np.ndarray:
    """Metric inner product of two chart-component vectors at p."""
    return np.sum(to_frame(sp, p, u) * to_frame(sp, p, v), axis=-1)


def cross(sp: SpaceParams, p, u, v) -> np.ndarray:
    """Vector product for the direct orientation (E1, E2, E3), chart components in and out."""
    w = np.cross(to_frame(sp, p, u), to_frame(sp, p, v))
    return from_frame(sp, p, w)


def structure_constants(sp: SpaceParams, p) -> np.ndarray:
    """c[i, j, k] = <[Ei, Ej], Ek> for the chart frame.

    [E1, E2] = -(kappa/2) y E1 + (kappa/2) x E2 + 2 tau E3, the other brackets vanish.
    """
    q = _coords(p)
    chart_mu(sp, q)
    c = np.zeros(q.shape[:-1] + (3, 3, 3))
    c[..., 0, 1, 0] = -0.5 * sp.kappa * q[..., 1]
    c[..., 0, 1, 1] = 0.5 * sp.kappa * q[..., 0]
    c[..., 0, 1, 2] = 2.0 * sp.tau
    c[..., 1, 0, :] = -c[..., 0, 1, :]
    return c


def koszul(c: np.ndarray) -> np.ndarray:
    """Christoffel symbols <nabla_Ei Ej, Ek> of an orthonormal frame from its brackets."""
    return 0.5 * (
        c
        + np.einsum("...kij->...ijk", c)
        - np.einsum("...jki->...ijk", c)
    )


def frame_connection_at(sp: SpaceParams, p) -> np.ndarray:
    """Gamma[i, j, k] = <nabla_Ei Ej, Ek> for the chart frame at p."""
    return koszul(structure_constants(sp, p))


def _frame_connection_derivatives(sp: SpaceParams, p) -> np.ndarray:
    """dGamma[n, i, j, k] = En(Gamma[i, j, k]); only E1(x) = E2(y) = mu matter."""
    q = _coords(p)
    mu = chart_mu(sp, q)
    half = 0.5 * sp.kappa * mu
    dc = np.zeros(q.shape[:-1] + (3, 3, 3, 3))
    # E1 acts on c12^2 = (kappa/2) x, E2 on c12^1 = -(kappa/2) y
    dc[..., 0, 0, 1, 1] = half
    dc[..., 0, 1, 0, 1] = -half
    dc[..., 1, 0, 1, 0] = -half
    dc[..., 1, 1, 0, 0] = half
    return koszul(dc)


def connection_coefficients(sp: SpaceParams) -> np.ndarray:
    """Constant Christoffel table of the left-invariant frame (see ``invariant_frame_at``).

    Gamma[i, j, k] = <nabla_Ei Ej, Ek>, zero-based indices.
    """
    t, d = sp.tau, sp.tau - sp.sigma
    gamma = np.zeros((3, 3, 3))
    gamma[0, 1, 2] = t
    gamma[1, 2, 0] = t
    gamma[1, 0, 2] = -t
    gamma[0, 2, 1] = -t
    gamma[2, 1, 0] = d
    gamma[2, 0, 1] = -d
    return gamma


def invariant_frame_at(sp: SpaceParams, p) -> np.ndarray:
    """Chart components (as columns) of the frame rotated by sigma*z in the horizontal plane.

    Its brackets are [E1,E2] = 2 tau E3, [E2,E3] = sigma E1, [E3,E1] = sigma E2 whenever
    tau != 0 or kappa == 0. Product spaces with kappa != 0 admit no such frame.
    """
    q = _coords(p)
    m = frame_matrix(sp, q)
    angle = sp.sigma * q[..., 2]
    c, s = np.cos(angle), np.sin(angle)
    out = m.copy()
    out[..., :, 0] = c[..., None] * m[..., :, 0] + s[..., None] * m[..., :, 1]
    out[..., :, 1] = -s[..., None] * m[..., :, 0] + c[..., None] * m[..., :, 1]
    return out


def curvature_tensor_at(sp: SpaceParams, p) -> np.ndarray:
    """R[i, j, k, n] = <R(Ei, Ej) Ek, En> with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]."""
    gamma = frame_connection_at(sp, p)
    dgamma = _frame_connection_derivatives(sp, p)
    c = structure_constants(sp, p)
    r = dgamma - np.swapaxes(dgamma, -4, -3)
    r = r + np.einsum("...jkm,...imn->...ijkn", gamma, gamma)
    r = r - np.einsum("...ikm,...jmn->...ijkn", gamma, gamma)
    r = r - np.einsum("...ijm,...mkn->...ijkn", c, gamma)
    return r


def sectional_curvature(sp: SpaceParams, p, u, v) -> np.ndarray:
    """Sectional curvature of span(u, v); u, v given by chart components."""
    q = _coords(p)
    wu, wv = to_frame(sp, q, u), to_frame(sp, q, v)
    return sectional_curvature_frame(curvature_tensor_at(sp, q), wu, wv)


def sectional_curvature_frame(r: np.ndarray, wu: np.ndarray, wv: np.ndarray) -> np.ndarray:
    num = np.einsum("...ijkn,...i,...j,...k,...n->...", r, wu, wv, wv, wu)
    area2 = (np.sum(wu * wu, -1) * np.sum(wv * wv, -1) - np.sum(wu * wv, -1) ** 2)
    return num / area2


def ricci(sp: SpaceParams, p, n) -> np.ndarray:
    """Ric(n, n) for chart components n."""
    q = _coords(p)
    return ricci_frame(curvature_tensor_at(sp, q), to_frame(sp, q, n))


def ricci_frame(r: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("...ijki,...j,...k->...", r, w, w)


@dataclass(frozen=True, eq=False)
class VectorField:
    """A vector field given by chart components; ``frame`` optionally gives frame components directly."""

    name: str
    chart: Callable[[np.ndarray], np.ndarray]
    frame: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.chart(_coords(p)), dtype=float)

    def frame_components(self, sp: SpaceParams, p) -> np.ndarray:
        q = _coords(p)
        if self.frame is not None:
            return np.broadcast_to(self.frame(q), q.shape).astype(float)
        return to_frame(sp, q, self.chart(q))


def constant_frame_field(sp: SpaceParams, index: int) -> VectorField:
    """The chart frame field E_{index+1}."""
    unit = np.eye(3)[index]
    return VectorField(
        name=f"E{index + 1}",
        chart=lambda q: frame_matrix(sp, q)[..., :, index],
        frame=lambda q: np.broadcast_to(unit, q.shape),
    )


def invariant_frame_fields(sp: SpaceParams) -> tuple[VectorField, VectorField, VectorField]:
    return tuple(
        VectorField(name=f"E{i + 1}'", chart=(lambda q, i=i: invariant_frame_at(sp, q)[..., :, i]))
        for i in range(3)
    )


def directional_derivative(fun: Callable[[np.ndarray], np.ndarray], p, direction, scale: float = 1.0) -> np.ndarray:
    """d/de fun(p + e*direction) at e = 0, fourth order."""
    q = _coords(p)
    d = np.asarray(direction, dtype=float)
    return central_derivative(lambda e: fun(q + e * d), FD_STEP * scale)


def covariant_derivative(sp: SpaceParams, v_field: VectorField, w_field: VectorField, p) -> np.ndarray:
    """Chart components of nabla_V W at p.

    Frame components of W are differentiated along V with fourth-order central
    differences, then the chart-frame Christoffel symbols are applied.
    """
    q = _coords(p)
    v = v_field(q)
    wv = to_frame(sp, q, v)
    ww = w_field.frame_components(sp, q)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(ww))):
        raise NumericalError(f"field {w_field.name} is not finite near the evaluation point")
    dw = directional_derivative(lambda x: w_field.frame_components(sp, x), q, v)
    gamma = frame_connection_at(sp, q)
    nabla = dw + np.einsum("...i,...j,...ijk->...k", wv, ww, gamma)
    return from_frame(sp, q, nabla)


def lie_bracket(sp: SpaceParams, v_field: VectorField, w_field: VectorField, p) -> np.ndarray:
    """Chart components of [V, W] at p, by differentiating chart components."""
    q = _coords(p)
    v, w = v_field(q), w_field(q)
    dw_v = directional_derivative(w_field, q, v)
    dv_w = directional_derivative(v_field, q, w)
    return dw_v - dv_w


class KillingFields:
    """Closed-form Killing fields of E(kappa, tau).

    E3 exists on every space. X, X_alpha and the flow of X are only provided
    for Nil3 = E(0, tau):

        X = E1 + 2 tau y E3,  phi_t(x, y, z) = (x + t, y, z + tau t y),
        X_alpha = cos(alpha)(E1 + 2 tau y E3) + sin(alpha)(E2 - 2 tau x E3).
    """

    def __init__(self, sp: SpaceParams):
        self.space = sp

    @property
    def E3(self) -> VectorField:
        return constant_frame_field(self.space, 2)

    def _require_nil(self, what: str):
        if not self.space.is_nil:
            raise UnsupportedSpaceError(
                f"{what} is only available on Nil3 (kappa = 0), got kappa={self.space.kappa}"
            )

    @property
    def X(self) -> VectorField:
        return self.x_alpha(0.0, name="X")

    def x_alpha(self, alpha: float, name: str | None = None) -> VectorField:
        self._require_nil("X_alpha")
        tau = self.space.tau
        ca, sa = math.cos(alpha), math.sin(alpha)

        def chart(q):
            x, y = q[..., 0], q[..., 1]
            return np.stack(
                [np.full_like(x, ca), np.full_like(x, sa), tau * (y * ca - x * sa)], axis=-1
            )

        def frame(q):
            x, y = q[..., 0], q[..., 1]
            return np.stack(
                [np.full_like(x, ca), np.full_like(x, sa), 2.0 * tau * (y * ca - x * sa)], axis=-1
            )

        return VectorField(name=name or f"X_{alpha:g}", chart=chart, frame=frame)

    def flow(self, t: float, p) -> np.ndarray:
        """phi_t(p) for the flow of X."""
        self._require_nil("the flow of X")
        q = _coords(p).copy()
        q[..., 2] = q[..., 2] + self.space.tau * t * q[..., 1]
        q[..., 0] = q[..., 0] + t
        return q

    def names(self) -> list[str]:
        return ["E3", "X", "X_alpha", "flow"] if self.space.is_nil else ["E3"]


def killing_fields(sp: SpaceParams) -> KillingFields:
    return KillingFields(sp)


def killing_residual(sp: SpaceParams, field: VectorField, points) -> float:
    """max |<nabla_V X, W> + <nabla_W X, V>| over frame pairs (V, W) at ``points``."""
    q = _coords(points)
    n = np.empty(q.shape[:-1] + (3, 3))
    for i in range(3):
        ei = constant_frame_field(sp, i)
        nabla = to_frame(sp, q, covariant_derivative(sp, ei, field, q))
        n[..., i, :] = nabla
    residual = float(np.max(np.abs(n + np.swapaxes(n, -1, -2))))
    logger.debug("Killing residual of %s: %.3e", field.name, residual)
    return residual
