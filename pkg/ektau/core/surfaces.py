"""
Immersed parameterized surfaces in E(kappa, tau).

An ``Immersion`` hands out second-order jets (F, F_s, F_t, F_ss, F_st, F_tt) of
its map; the built-in families have closed-form jets, ``Immersion.from_samples``
builds one from grid samples with fourth-order stencils. Everything is evaluated
pointwise and vectorized over arrays of parameters.

Conventions: the normal is chosen so that {F_s, F_t, eta} is direct, the shape
operator is A = I^-1 II in the parameter basis, H = tr(A)/2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import space as geo
from .errors import ChartDomainError, ContractViolationError, DegeneracyError, UnsupportedSpaceError
from .grids import FD_STEP, Rectangle, fd4_first, fd4_second
from .space import SpaceParams

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


@dataclass(frozen=True, eq=False)
class SurfaceJet:
    F: np.ndarray
    F_s: np.ndarray
    F_t: np.ndarray
    F_ss: np.ndarray
    F_st: np.ndarray
    F_tt: np.ndarray

    def swapped(self) -> "SurfaceJet":
        return SurfaceJet(self.F, self.F_t, self.F_s, self.F_tt, self.F_st, self.F_ss)


JetFunction = Callable[[np.ndarray, np.ndarray], SurfaceJet]


@dataclass(frozen=True, eq=False)
class Immersion:
    """A map from the parameter rectangle into chart coordinates of ``space``."""

    space: SpaceParams
    rect: Rectangle
    name: str
    jet_fn: JetFunction
    params: dict = field(default_factory=dict)
    scale: float = 1.0
    nodes: tuple[np.ndarray, np.ndarray] | None = None
    grid_jet: SurfaceJet | None = None

    @classmethod
    def from_samples(cls, space: SpaceParams, s: np.ndarray, t: np.ndarray, xyz: np.ndarray,
                     name: str = "custom_grid") -> "Immersion":
        """Grid-sampled immersion; ``xyz[i, j]`` is F(s[i], t[j]) on uniform nodes."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        xyz = np.asarray(xyz, dtype=float)
        if xyz.shape != (len(s), len(t), 3):
            raise ContractViolationError(
                f"samples must have shape ({len(s)}, {len(t)}, 3), got {xyz.shape}"
            )
        hs, ht = s[1] - s[0], t[1] - t[0]
        if not (np.allclose(np.diff(s), hs) and np.allclose(np.diff(t), ht)):
            raise ContractViolationError("custom grids must be uniform in s and t")
        f_s = fd4_first(xyz, hs, 0)
        f_t = fd4_first(xyz, ht, 1)
        jet = SurfaceJet(
            F=xyz,
            F_s=f_s,
            F_t=f_t,
            F_ss=fd4_second(xyz, hs, 0),
            F_st=fd4_first(f_s, ht, 1),
            F_tt=fd4_second(xyz, ht, 1),
        )
        rect = (float(s[0]), float(s[-1]), float(t[0]), float(t[-1]))
        return cls(space, rect, name, _lookup_jet, nodes=(s, t), grid_jet=jet)

    @property
    def is_sampled(self) -> bool:
        return self.grid_jet is not None

    def node_index(self, s, t) -> tuple[np.ndarray, np.ndarray]:
        ns, nt = self.nodes
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        i = np.rint((s - ns[0]) / (ns[1] - ns[0])).astype(int)
        j = np.rint((t - nt[0]) / (nt[1] - nt[0])).astype(int)
        if (np.any(i < 0) or np.any(i >= len(ns)) or np.any(j < 0) or np.any(j >= len(nt))
                or not np.allclose(ns[np.clip(i, 0, len(ns) - 1)], s, atol=1e-9)
                or not np.allclose(nt[np.clip(j, 0, len(nt) - 1)], t, atol=1e-9)):
            raise ContractViolationError(f"{self.name} is sampled; evaluate it at grid nodes only")
        return i, j

    def jet(self, s, t) -> SurfaceJet:
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        if self.is_sampled:
            return _lookup_jet(self, s, t)
        return self.jet_fn(s, t)

    def __call__(self, s, t) -> np.ndarray:
        return self.jet(s, t).F

    def swapped(self) -> "Immersion":
        """Same surface with parameters (t, s); the induced normal flips."""
        s0, s1, t0, t1 = self.rect
        rect = (t0, t1, s0, s1)
        if self.is_sampled:
            g = self.grid_jet
            tr = lambda a: np.swapaxes(a, 0, 1)
            jet = SurfaceJet(tr(g.F), tr(g.F_t), tr(g.F_s), tr(g.F_tt), tr(g.F_st), tr(g.F_ss))
            return Immersion(self.space, rect, f"{self.name}~", _lookup_jet, dict(self.params),
                             self.scale, (self.nodes[1], self.nodes[0]), jet)
        inner_fn = self.jet_fn
        return Immersion(self.space, rect, f"{self.name}~",
                         lambda s, t: inner_fn(t, s).swapped(), dict(self.params), self.scale)

    def node_grid(self, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        """Parameter meshgrid (indexing ij) with ``shape`` nodes over the rectangle."""
        if self.is_sampled:
            return np.meshgrid(*self.nodes, indexing="ij")
        s0, s1, t0, t1 = self.rect
        return np.meshgrid(np.linspace(s0, s1, shape[0]), np.linspace(t0, t1, shape[1]), indexing="ij")


def _lookup_jet(imm: Immersion, s, t) -> SurfaceJet:
    i, j = imm.node_index(s, t)
    g = imm.grid_jet
    return SurfaceJet(*(a[i, j] for a in (g.F, g.F_s, g.F_t, g.F_ss, g.F_st, g.F_tt)))


@dataclass(frozen=True, eq=False)
class FundamentalForms:
    """Fundamental forms and curvatures at a batch of parameter points."""

    point: np.ndarray
    first: np.ndarray
    second: np.ndarray
    normal: np.ndarray
    normal_frame: np.ndarray
    tangent_frame: np.ndarray
    shape_operator: np.ndarray
    H: np.ndarray
    K: np.ndarray | None
    K_ext: np.ndarray
    angle: np.ndarray
    ambient_curvature: np.ndarray
    ricci_normal: np.ndarray

    @property
    def A_norm_sq(self) -> np.ndarray:
        a = self.shape_operator
        return np.einsum("...ij,...ji->...", a, a)

    @property
    def det_A(self) -> np.ndarray:
        return np.linalg.det(self.shape_operator)


def _first_form_from_frame(ws: np.ndarray, wt: np.ndarray) -> np.ndarray:
    I = np.empty(ws.shape[:-1] + (2, 2))
    I[..., 0, 0] = np.sum(ws * ws, -1)
    I[..., 0, 1] = I[..., 1, 0] = np.sum(ws * wt, -1)
    I[..., 1, 1] = np.sum(wt * wt, -1)
    return I


def first_form(imm: Immersion, s, t) -> np.ndarray:
    jet = imm.jet(s, t)
    sp = imm.space
    return _first_form_from_frame(geo.to_frame(sp, jet.F, jet.F_s), geo.to_frame(sp, jet.F, jet.F_t))


def _check_rank(ws: np.ndarray, wt: np.ndarray, name: str):
    d = np.stack([ws, wt], axis=-1)
    sv = np.linalg.svd(d, compute_uv=False)
    bad = sv[..., 1] <= RANK_TOLERANCE * np.maximum(sv[..., 0], 1.0)
    if np.any(bad):
        worst = sv[bad][np.argmin(sv[bad][:, 1])]
        raise DegeneracyError(f"{name}: differential drops rank at {int(bad.sum())} point(s)", worst)


def _first_form_jet(imm: Immersion, s: np.ndarray, t: np.ndarray) -> dict[str, np.ndarray]:
    """E, F, G and the derivatives the Brioschi formula needs."""
    if imm.is_sampled:
        ns, nt = imm.nodes
        S, T = np.meshgrid(ns, nt, indexing="ij")
        I = first_form(imm, S, T)
        hs, ht = ns[1] - ns[0], nt[1] - nt[0]
        e, f, g = I[..., 0, 0], I[..., 0, 1], I[..., 1, 1]
        full = {
            "E": e, "F": f, "G": g,
            "E_s": fd4_first(e, hs, 0), "E_t": fd4_first(e, ht, 1),
            "F_s": fd4_first(f, hs, 0), "F_t": fd4_first(f, ht, 1),
            "G_s": fd4_first(g, hs, 0), "G_t": fd4_first(g, ht, 1),
            "E_tt": fd4_second(e, ht, 1), "G_ss": fd4_second(g, hs, 0),
            "F_st": fd4_first(fd4_first(f, hs, 0), ht, 1),
        }
        i, j = imm.node_index(s, t)
        return {k: v[i, j] for k, v in full.items()}

    h = FD_STEP * imm.scale
    k = np.arange(-2, 3) * h
    S = s[..., None, None] + k[:, None]
    T = t[..., None, None] + k[None, :]
    I = first_form(imm, S, T)
    e, f, g = I[..., 0, 0], I[..., 0, 1], I[..., 1, 1]

    def ds(a, w, hh):
        return np.einsum("...kl,k->...l", a, w)[..., 2] / hh

    def dt(a, w, hh):
        return np.einsum("...kl,l->...k", a, w)[..., 2] / hh

    return {
        "E": e[..., 2, 2], "F": f[..., 2, 2], "G": g[..., 2, 2],
        "E_s": ds(e, _D1, h), "E_t": dt(e, _D1, h),
        "F_s": ds(f, _D1, h), "F_t": dt(f, _D1, h),
        "G_s": ds(g, _D1, h), "G_t": dt(g, _D1, h),
        "E_tt": dt(e, _D2, h * h), "G_ss": ds(g, _D2, h * h),
        "F_st": np.einsum("...kl,k,l->...", f, _D1, _D1) / (h * h),
    }


def brioschi_curvature(d: dict[str, np.ndarray]) -> np.ndarray:
    """Gauss curvature from the first fundamental form alone."""
    e, f, g = d["E"], d["F"], d["G"]
    m1 = np.empty(e.shape + (3, 3))
    m1[..., 0, 0] = -0.5 * d["E_tt"] + d["F_st"] - 0.5 * d["G_ss"]
    m1[..., 0, 1] = 0.5 * d["E_s"]
    m1[..., 0, 2] = d["F_s"] - 0.5 * d["E_t"]
    m1[..., 1, 0] = d["F_t"] - 0.5 * d["G_s"]
    m1[..., 1, 1] = e
    m1[..., 1, 2] = f
    m1[..., 2, 0] = 0.5 * d["G_t"]
    m1[..., 2, 1] = f
    m1[..., 2, 2] = g
    m2 = np.zeros_like(m1)
    m2[..., 0, 1] = m2[..., 1, 0] = 0.5 * d["E_t"]
    m2[..., 0, 2] = m2[..., 2, 0] = 0.5 * d["G_s"]
    m2[..., 1:, 1:] = m1[..., 1:, 1:]
    return (np.linalg.det(m1) - np.linalg.det(m2)) / (e * g - f * f) ** 2


def intrinsic_curvature(imm: Immersion, s, t) -> np.ndarray:
    s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
    return brioschi_curvature(_first_form_jet(imm, s, t))


def fundamental_forms(imm: Immersion, s, t, intrinsic: bool = True) -> FundamentalForms:
    """First and second fundamental forms, normal and curvatures at (s, t).

    ``intrinsic=False`` skips the Gauss curvature K (left as None), which is the
    only quantity that needs differences of the first form.
    """
    s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
    sp = imm.space
    jet = imm.jet(s, t)
    p = jet.F
    ws = geo.to_frame(sp, p, jet.F_s)
    wt = geo.to_frame(sp, p, jet.F_t)
    _check_rank(ws, wt, imm.name)

    I = _first_form_from_frame(ws, wt)
    n = np.cross(ws, wt)
    eta = n / np.linalg.norm(n, axis=-1, keepdims=True)

    dmx, dmy = geo.to_frame_derivatives(sp, p)
    gamma = geo.frame_connection_at(sp, p)
    pairs = {
        (0, 0): (jet.F_s, jet.F_s, jet.F_ss, ws, ws),
        (0, 1): (jet.F_s, jet.F_t, jet.F_st, ws, wt),
        (1, 0): (jet.F_t, jet.F_s, jet.F_st, wt, ws),
        (1, 1): (jet.F_t, jet.F_t, jet.F_tt, wt, wt),
    }
    II = np.empty(I.shape)
    for (a, b), (fa, fb, fab, wa, wb) in pairs.items():
        dm = dmx * fa[..., 0, None, None] + dmy * fa[..., 1, None, None]
        nabla = (geo.to_frame(sp, p, fab)
                 + np.einsum("...ij,...j->...i", dm, fb)
                 + np.einsum("...i,...j,...ijk->...k", wa, wb, gamma))
        II[..., a, b] = np.sum(nabla * eta, -1)
    II[..., 0, 1] = II[..., 1, 0] = 0.5 * (II[..., 0, 1] + II[..., 1, 0])

    shape_op = np.linalg.solve(I, II)
    r = geo.curvature_tensor_at(sp, p)
    return FundamentalForms(
        point=p,
        first=I,
        second=II,
        normal=geo.from_frame(sp, p, eta),
        normal_frame=eta,
        tangent_frame=np.stack([ws, wt], axis=-2),
        shape_operator=shape_op,
        H=0.5 * np.trace(shape_op, axis1=-2, axis2=-1),
        K=intrinsic_curvature(imm, s, t) if intrinsic else None,
        K_ext=np.linalg.det(II) / np.linalg.det(I),
        angle=eta[..., 2],
        ambient_curvature=geo.sectional_curvature_frame(r, ws, wt),
        ricci_normal=geo.ricci_frame(r, eta),
    )


def principal_curvatures(forms: FundamentalForms) -> tuple[np.ndarray, np.ndarray]:
    disc = np.sqrt(np.maximum(pinch(forms), 0.0))
    return forms.H + disc, forms.H - disc


def pinch(forms: FundamentalForms) -> np.ndarray:
    """H^2 - det A = (k1 - k2)^2 / 4."""
    return forms.H ** 2 - forms.det_A


def ambient_sectional_curvature(forms: FundamentalForms) -> np.ndarray:
    return forms.ambient_curvature


def gauss_residual(forms: FundamentalForms) -> np.ndarray:
    """K - Kbar - K_ext; zero by the Gauss equation."""
    if forms.K is None:
        raise ContractViolationError("Gauss residual needs the intrinsic curvature")
    return forms.K - forms.ambient_curvature - forms.K_ext


def jacobi_candidates(imm: Immersion, s, t, alphas=(math.pi / 4, math.pi / 2)) -> dict:
    """eta3 = <eta, E3> and, on Nil3, <eta, X> and <eta, X_alpha> for each alpha."""
    forms = fundamental_forms(imm, s, t, intrinsic=False)
    out = {"eta3": forms.angle}
    if imm.space.is_nil:
        kf = geo.killing_fields(imm.space)
        eta, p = forms.normal_frame, forms.point
        out["X"] = np.sum(eta * kf.X.frame_components(imm.space, p), -1)
        out["X_alpha"] = {
            float(a): np.sum(eta * kf.x_alpha(a).frame_components(imm.space, p), -1) for a in alphas
        }
    return out


def potential_q(imm: Immersion, s, t) -> np.ndarray:
    """Stability potential |A|^2 + Ric(eta)."""
    forms = fundamental_forms(imm, s, t, intrinsic=False)
    return forms.A_norm_sq + forms.ricci_normal


def potential_qtilde(imm: Immersion, s, t) -> np.ndarray:
    """3H^2 + kappa - tau^2 + (H^2 - det A)."""
    forms = fundamental_forms(imm, s, t, intrinsic=False)
    sp = imm.space
    return 3.0 * forms.H ** 2 + sp.kappa - sp.tau ** 2 + pinch(forms)


def potential_identity_residual(imm: Immersion, s, t) -> np.ndarray:
    """(-K + qtilde) - (|A|^2 + Ric(eta)) pointwise."""
    forms = fundamental_forms(imm, s, t)
    sp = imm.space
    qtilde = 3.0 * forms.H ** 2 + sp.kappa - sp.tau ** 2 + pinch(forms)
    return (-forms.K + qtilde) - (forms.A_norm_sq + forms.ricci_normal)


def multigraph_margin(imm: Immersion, s, t) -> float:
    """min |<eta, X>| over the given parameters (positive for horizontal multigraphs)."""
    return float(np.min(np.abs(jacobi_candidates(imm, s, t, alphas=())["X"])))


# -- built-in families ----------------------------------------------------------------


def _cylinder_curve(sp: SpaceParams, k: float, s: np.ndarray):
    """Constant-curvature curve through the origin, heading +y, bending towards +x for k > 0."""
    c = k * k + sp.kappa
    theta = 0.5 * s
    if c > 0.0:
        w = math.sqrt(c)
        sn, cn = np.sin(w * theta) / w, np.cos(w * theta)
    elif c == 0.0:
        sn, cn = theta, np.ones_like(theta)
    else:
        w = math.sqrt(-c)
        sn, cn = np.sinh(w * theta) / w, np.cosh(w * theta)
    d2 = cn ** 2 + k * k * sn ** 2
    if np.any(d2 < 1e-12):
        raise ChartDomainError(
            f"curve of geodesic curvature {k} leaves the chart (kappa={sp.kappa}); shorten the arc"
        )
    x = 2.0 * k * sn ** 2 / d2
    y = 2.0 * sn * cn / d2
    sinb = 2.0 * k * sn * cn / d2
    cosb = (cn ** 2 - k * k * sn ** 2) / d2
    if k == 0.0:
        beta = np.zeros_like(s)
    elif c > 0.0:
        # continuous branch of 2*atan2(k sn, cn) as cn changes sign
        a = w * theta
        r = abs(k) / w
        phi = a + np.arctan2((r - 1.0) * np.sin(a) * np.cos(a), np.cos(a) ** 2 + r * np.sin(a) ** 2)
        beta = 2.0 * math.copysign(1.0, k) * phi
    else:
        beta = 2.0 * np.arctan2(k * sn, cn)
    return x, y, sinb, cosb, beta


def cylinder_jet(sp: SpaceParams, k: float, s: np.ndarray, t: np.ndarray) -> SurfaceJet:
    x, y, sinb, cosb, beta = _cylinder_curve(sp, k, s)
    kappa, tau = sp.kappa, sp.tau
    mu = 1.0 + 0.25 * kappa * (x ** 2 + y ** 2)
    lam = 1.0 / mu
    xs, ys = mu * sinb, mu * cosb
    mu_s = 0.5 * kappa * (x * xs + y * ys)
    xss = mu_s * sinb + k * mu ** 2 * cosb
    yss = mu_s * cosb - k * mu ** 2 * sinb
    wedge = x * ys - y * xs
    zs = tau * lam * wedge
    zss = tau * (-lam ** 2 * mu_s * wedge + lam * (x * yss - y * xss))
    if kappa != 0.0:
        z = (2.0 * tau / kappa) * (k * s - beta)
    elif k != 0.0:
        z = -tau * (beta - np.sin(beta)) / k ** 2
    else:
        z = np.zeros_like(s)
    zero = np.zeros_like(s)
    one = np.ones_like(s)
    return SurfaceJet(
        F=np.stack([x, y, z + t], -1),
        F_s=np.stack([xs, ys, zs], -1),
        F_t=np.stack([zero, zero, one], -1),
        F_ss=np.stack([xss, yss, zss], -1),
        F_st=np.zeros(s.shape + (3,)),
        F_tt=np.zeros(s.shape + (3,)),
    )


def cylinder_immersion(sp: SpaceParams, k_gamma: float, rect: Rectangle = (0.0, 1.0, 0.0, 1.0)) -> Immersion:
    """Vertical cylinder over the curve of geodesic curvature ``k_gamma``; s is arclength, t the fiber."""
    k = float(k_gamma)
    if k == 0.0 and sp.kappa > 0.0:
        # great circles reach the missing point at s = (2n+1) pi / sqrt(kappa)
        period = 2.0 * math.pi / math.sqrt(sp.kappa)
        first = math.ceil((rect[0] - 0.5 * period) / period)
        if 0.5 * period + first * period <= rect[1]:
            raise ChartDomainError(
                f"great circle of E({sp.kappa:g}, {sp.tau:g}) leaves the chart on s in [{rect[0]:g}, {rect[1]:g}]"
            )
    _cylinder_curve(sp, k, np.linspace(rect[0], rect[1], 257))
    return Immersion(sp, rect, f"cylinder(k={k:g})", lambda s, t: cylinder_jet(sp, k, s, t),
                     {"family": "cylinder", "k": k})


HeightFunction = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, ...]]


def vertical_graph(sp: SpaceParams, height: HeightFunction, rect: Rectangle, name: str = "vertical_graph",
                   params: dict | None = None) -> Immersion:
    """Graph z = h(x, y); ``height`` returns (h, h_x, h_y, h_xx, h_xy, h_yy)."""

    def jet(s, t):
        h, hs, ht, hss, hst, htt = (np.broadcast_to(a, s.shape) for a in height(s, t))
        zero, one = np.zeros_like(s), np.ones_like(s)
        return SurfaceJet(
            F=np.stack([s, t, h], -1),
            F_s=np.stack([one, zero, hs], -1),
            F_t=np.stack([zero, one, ht], -1),
            F_ss=np.stack([zero, zero, hss], -1),
            F_st=np.stack([zero, zero, hst], -1),
            F_tt=np.stack([zero, zero, htt], -1),
        )

    return Immersion(sp, rect, name, jet, dict(params or {"family": "vertical_graph"}))


def horizontal_slice(sp: SpaceParams, height: float = 0.0, rect: Rectangle = (-1.0, 1.0, -1.0, 1.0)) -> Immersion:
    c = float(height)
    zero = lambda s, t: np.zeros_like(s)
    return vertical_graph(
        sp,
        lambda s, t: (np.full_like(s, c), zero(s, t), zero(s, t), zero(s, t), zero(s, t), zero(s, t)),
        rect, name=f"slice(z={c:g})", params={"family": "horizontal_slice", "height": c},
    )


FMP_SPACE = SpaceParams(0.0, 0.5)


def fmp_height(theta: float) -> HeightFunction:
    S = math.sinh(2.0 * theta)

    def height(x, y):
        root = np.sqrt(1.0 + y * y)
        h = 0.5 * x * y + 0.5 * S * (y * root + np.arcsinh(y))
        return h, 0.5 * y, 0.5 * x + S * root, np.zeros_like(x), np.full_like(x, 0.5), S * y / root

    return height


def fmp_surface(theta: float, rect: Rectangle = (-1.0, 1.0, -1.0, 1.0)) -> Immersion:
    """Entire minimal vertical graph M_theta of Nil3 = E(0, 1/2), parameters (x, y)."""
    theta = float(theta)
    return vertical_graph(FMP_SPACE, fmp_height(theta), rect, name=f"fmp(theta={theta:g})",
                          params={"family": "fmp", "theta": theta})


def fmp_tangent_fields(theta: float) -> tuple[geo.VectorField, geo.VectorField]:
    """T1 = E1 + y E3 and T2 = E2 + sinh(2 theta) sqrt(1+y^2) E3, global tangent basis of M_theta."""
    S = math.sinh(2.0 * theta)

    def t1_frame(q):
        one = np.ones_like(q[..., 0])
        return np.stack([one, 0.0 * one, q[..., 1]], -1)

    def t2_frame(q):
        one = np.ones_like(q[..., 0])
        return np.stack([0.0 * one, one, S * np.sqrt(1.0 + q[..., 1] ** 2)], -1)

    return (
        geo.VectorField("T1", lambda q: geo.from_frame(FMP_SPACE, q, t1_frame(q)), t1_frame),
        geo.VectorField("T2", lambda q: geo.from_frame(FMP_SPACE, q, t2_frame(q)), t2_frame),
    )


def tangency_determinant(theta: float, alpha: float, x, y) -> np.ndarray:
    """det(T1, T2, X_alpha) in frame components, with T1, T2 taken from the surface jet."""
    imm = fmp_surface(theta)
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    jet = imm.jet(x, y)
    t1 = geo.to_frame(FMP_SPACE, jet.F, jet.F_s)
    t2 = geo.to_frame(FMP_SPACE, jet.F, jet.F_t)
    xa = geo.killing_fields(FMP_SPACE).x_alpha(alpha).frame_components(FMP_SPACE, jet.F)
    return np.linalg.det(np.stack([t1, t2, xa], axis=-2))


GraphJet = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, ...]]


def horizontal_graph_immersion(sp: SpaceParams, u: GraphJet, rect: Rectangle, name: str = "horizontal_graph",
                               params: dict | None = None) -> Immersion:
    """F(y, z) = (u, y, z + tau y u); ``u`` returns (u, u_y, u_z, u_yy, u_yz, u_zz)."""
    if not sp.is_nil:
        raise UnsupportedSpaceError("horizontal graphs along X are defined on Nil3 only")
    tau = sp.tau

    def jet(y, z):
        v, vy, vz, vyy, vyz, vzz = (np.broadcast_to(a, y.shape) for a in u(y, z))
        zero, one = np.zeros_like(y), np.ones_like(y)
        return SurfaceJet(
            F=np.stack([v, y, z + tau * y * v], -1),
            F_s=np.stack([vy, one, tau * (v + y * vy)], -1),
            F_t=np.stack([vz, zero, one + tau * y * vz], -1),
            F_ss=np.stack([vyy, zero, tau * (2.0 * vy + y * vyy)], -1),
            F_st=np.stack([vyz, zero, tau * (vz + y * vyz)], -1),
            F_tt=np.stack([vzz, zero, tau * y * vzz], -1),
        )

    return Immersion(sp, rect, name, jet, dict(params or {"family": "horizontal_graph"}))


def vertical_plane(sp: SpaceParams, a: float, b: float, rect: Rectangle = (-1.0, 1.0, -1.0, 1.0)) -> Immersion:
    """Pi_{a,b}: the horizontal graph of u = a y + b."""
    a, b = float(a), float(b)

    def u(y, z):
        zero = np.zeros_like(y)
        return a * y + b, np.full_like(y, a), zero, zero, zero, zero

    return horizontal_graph_immersion(sp, u, rect, name=f"plane(a={a:g},b={b:g})",
                                      params={"family": "vertical_plane", "a": a, "b": b})
