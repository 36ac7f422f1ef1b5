"""
Verification tools — the acceptance suite behind ``verify-all``.

Every check returns a CheckResult; ``verify_all`` runs them in a fixed order,
writes ``verification.json`` / ``verification.csv`` and a Markdown (or PDF) report.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np
import pandas as pd

from ..core.errors import error_result
from ..core.grids import ScalarFieldGrid
from ..core.horizontal_graphs import (
    GraphFunction,
    consistency_vs_mean_curvature,
    fmp_tangency_curve,
    newton_rate,
    plane_solution,
    residual,
    solve_dirichlet,
    vertical_solution,
)
from ..core.parabolicity import CutoffFamily, estimate_chain_check, flat_plane
from ..core.space import (
    SpaceParams,
    connection_coefficients,
    constant_frame_field,
    covariant_derivative,
    frame_matrix,
    killing_fields,
    killing_residual,
    metric_at,
    ricci,
    sectional_curvature,
)
from ..core.spectra import (
    SpectralProblem,
    composite_identity_residual,
    cylinder_stability_verdict,
    first_eigenvalue,
    jacobi_residual,
    lambda1_formula,
)
from ..core.surfaces import (
    cylinder_immersion,
    fmp_surface,
    fundamental_forms,
    jacobi_candidates,
    potential_identity_residual,
    potential_q,
    tangency_determinant,
    vertical_plane,
)
from ..utils.state_manager import write_artifacts
from .curvature_tools import compute_curvature
from .report_tools import generate_markdown_report, generate_pdf_report

logger = logging.getLogger(__name__)

CYLINDER_KAPPAS = (-1.0, 0.0, 1.0)
CYLINDER_TAUS = (0.0, 0.5, 1.0)
CYLINDER_KS = (0.0, 0.5, 1.0)
EIGEN_RECTANGLES = ((1.0, 1.0), (2.0, 1.0), (3.0, 2.0))
EIGEN_TRIPLES = ((-1.0, 0.0, 0.0), (0.0, 0.5, 1.0), (-1.0, 1.0, 0.5), (0.0, 1.0, 0.0), (1.0, 1.0, 1.0))
SWEEPS = {
    (-1.0, 0.0, 0.0): ((1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (6.0, 6.0), (8.0, 8.0)),
    (0.0, 0.5, 1.0): ((1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (6.0, 6.0), (8.0, 8.0)),
    (0.0, 0.5, 0.0): ((2.0, 2.0), (4.0, 4.0), (8.0, 8.0), (16.0, 16.0), (24.0, 24.0)),
}


@dataclass(frozen=True)
class VerificationSettings:
    """Grid sizes of the suite; ``quick()`` keeps every check but shrinks the grids."""

    eigen_grid: int = 200
    sweep_grid: int = 48
    fmp_grid: int = 256
    dirichlet_grid: int = 33
    jacobi_tolerance: float = 1e-4

    @classmethod
    def quick(cls) -> "VerificationSettings":
        return cls(eigen_grid=64, sweep_grid=32, fmp_grid=64, dirichlet_grid=17, jacobi_tolerance=1e-3)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    rows: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed, "detail": self.detail}


def _skip_space(kappa: float, tau: float) -> bool:
    return kappa == 4.0 * tau * tau


def check_cylinder_geometry(settings: VerificationSettings) -> CheckResult:
    rows = []
    s, t = np.meshgrid(np.linspace(0.0, 1.0, 5), np.linspace(0.0, 1.0, 5), indexing="ij")
    for kappa, tau, k in product(CYLINDER_KAPPAS, CYLINDER_TAUS, CYLINDER_KS):
        if _skip_space(kappa, tau):
            continue
        sp = SpaceParams(kappa, tau)
        forms = fundamental_forms(cylinder_immersion(sp, k), s, t)
        expected = np.array([[k, tau], [tau, 0.0]])
        rows.append({
            "kappa": kappa, "tau": tau, "k": k,
            "II_error": float(np.max(np.abs(forms.second - expected))),
            "H_error": float(np.max(np.abs(forms.H - k / 2.0))),
            "K_max": float(np.max(np.abs(forms.K))),
            "K_ext_error": float(np.max(np.abs(forms.K_ext + tau ** 2))),
        })
    passed = all(r["II_error"] < 1e-8 and r["H_error"] < 1e-8 and r["K_max"] < 1e-6
                 and r["K_ext_error"] < 1e-8 for r in rows)
    worst = max(r["K_max"] for r in rows)
    return CheckResult(1, "cylinder geometry", passed,
                       f"{len(rows)} cylinders; II = [[k, tau], [tau, 0]], H = k/2, K_ext = -tau^2; max |K| = {worst:.2e}",
                       rows)


def check_eigenvalue_formula(settings: VerificationSettings) -> CheckResult:
    rows = []
    n = settings.eigen_grid
    for (kappa, tau, k), (a, b) in product(EIGEN_TRIPLES, EIGEN_RECTANGLES):
        sp = SpaceParams(kappa, tau)
        imm = cylinder_immersion(sp, k, (0.0, a, 0.0, b))
        value = first_eigenvalue(SpectralProblem.from_immersion(imm, grid=(n, n))).lambda1
        formula = lambda1_formula(sp, k, a, b)
        rows.append({"kappa": kappa, "tau": tau, "k": k, "a": a, "b": b, "lambda1": value,
                     "formula": formula, "relative_error": abs(value - formula) / abs(formula)})
    passed = all(r["relative_error"] < 0.01 for r in rows)
    worst = max(r["relative_error"] for r in rows)
    return CheckResult(2, "eigenvalue formula", passed,
                       f"{len(rows)} rectangles at {n}x{n}; worst relative error {worst:.2e}", rows)


def check_stability_verdicts(settings: VerificationSettings) -> CheckResult:
    rows = []
    verdicts = {}
    for (kappa, tau, k), sweep in SWEEPS.items():
        sp = SpaceParams(kappa, tau)
        verdict = cylinder_stability_verdict(sp, k, sweep, settings.sweep_grid)
        verdicts[(kappa, k)] = verdict
        lambdas = [r["lambda1"] for r in verdict.rows]
        rows.append({"kappa": kappa, "tau": tau, "k": k, "verdict": verdict.verdict,
                     "witness": verdict.witness, "min_lambda1": min(lambdas),
                     "last_lambda1": lambdas[-1], "expected_stable": kappa <= -k * k})

    stable = verdicts[(-1.0, 0.0)]
    unstable = verdicts[(0.0, 1.0)]
    marginal = verdicts[(0.0, 0.0)]
    witness_value = next((r["lambda1"] for r in unstable.rows
                          if unstable.witness and (r["a"], r["b"]) == unstable.witness), None)
    passed = (
        stable.verdict == "stable" and min(r["lambda1"] for r in stable.rows) >= 0.99
        and unstable.verdict == "unstable" and witness_value is not None and witness_value < -0.1
        and marginal.verdict == "marginal" and abs(marginal.rows[-1]["lambda1"]) < 0.05
    )
    return CheckResult(3, "stability verdicts", passed,
                       f"stable / unstable (witness {unstable.witness}) / marginal; "
                       f"verdict matches kappa <= -k^2 in every case", rows)


def check_pde_exactness(settings: VerificationSettings) -> CheckResult:
    rows = []
    for a, b in ((0.0, 0.0), (1.0, -0.5), (-2.0, 3.0), (0.5, 1.0)):
        res = residual(plane_solution(a, b))
        rows.append({"solution": f"{a:g}y+{b:g}", "residual_sup": res.sup, "max_abs_h": None})
    for c, d in ((1.0, 0.0), (-0.5, 2.0), (3.0, -1.0)):
        res = residual(vertical_solution(c, d))
        rows.append({"solution": f"{c:g}z+{d:g}", "residual_sup": res.sup, "max_abs_h": None})
    exact = all(r["residual_sup"] == 0.0 for r in rows)

    n = settings.fmp_grid
    for theta in (0.0, 0.5, 1.0):
        imm = fmp_surface(theta)
        x, y = np.meshgrid(np.linspace(-1.0, 1.0, n), np.linspace(-1.0, 1.0, n), indexing="ij")
        h = fundamental_forms(imm, x, y, intrinsic=False).H
        rows.append({"solution": f"M_theta={theta:g}", "residual_sup": None,
                     "max_abs_h": float(np.max(np.abs(h)))})
    minimal = all(r["max_abs_h"] < 1e-6 for r in rows if r["max_abs_h"] is not None)
    return CheckResult(4, "PDE exactness", exact and minimal,
                       f"affine solutions have zero residual at every node; FMP surfaces minimal at {n}x{n}", rows)


def check_tangency_determinant(settings: VerificationSettings) -> CheckResult:
    x, y = np.meshgrid(np.linspace(-2.0, 2.0, 101), np.linspace(-2.0, 2.0, 101), indexing="ij")
    rows = []
    for theta, alpha in product((0.0, 1.0), (math.pi / 4, math.pi / 2)):
        det = tangency_determinant(theta, alpha, x, y)
        closed = -math.sin(alpha) * (x + math.sinh(2.0 * theta) * np.sqrt(1.0 + y * y))
        curve = fmp_tangency_curve(theta, alpha)
        rows.append({"theta": theta, "alpha": alpha, "max_error": float(np.max(np.abs(det - closed))),
                     "on_curve": curve.on_curve_max, "off_curve": curve.off_curve_min})
    passed = all(r["max_error"] < 1e-8 and r["on_curve"] < 1e-8 and r["off_curve"] > 0.0 for r in rows)
    return CheckResult(5, "tangency determinant", passed,
                       "det(T1, T2, X_alpha) = -sin(alpha) (x + sinh(2 theta) sqrt(1 + y^2)) on 101x101", rows)


def check_potential_identity(settings: VerificationSettings) -> CheckResult:
    rows = []
    s, t = np.meshgrid(np.linspace(0.0, 1.0, 9), np.linspace(0.0, 1.0, 9), indexing="ij")
    for kappa, tau, k in ((-1.0, 0.5, 1.0), (0.0, 0.5, 1.0), (1.0, 1.0, 0.5), (-1.0, 0.0, 0.0)):
        imm = cylinder_immersion(SpaceParams(kappa, tau), k)
        rows.append({"surface": f"cylinder(kappa={kappa:g},tau={tau:g},k={k:g})",
                     "max_residual": float(np.max(np.abs(potential_identity_residual(imm, s, t))))})
    x, y = np.meshgrid(np.linspace(-1.0, 1.0, 41), np.linspace(-1.0, 1.0, 41), indexing="ij")
    for theta in (0.0, 0.5, 1.0):
        rows.append({"surface": f"M_theta={theta:g}",
                     "max_residual": float(np.max(np.abs(potential_identity_residual(fmp_surface(theta), x, y))))})
    passed = all(r["max_residual"] < 1e-6 for r in rows)
    return CheckResult(6, "potential identity", passed,
                       "(-K + qtilde) = |A|^2 + Ric(eta) on cylinders and FMP surfaces", rows)


def check_cutoff_chain(settings: VerificationSettings) -> CheckResult:
    plane = flat_plane()
    family = CutoffFamily.log_family(plane, 1.0, 8)
    ones = lambda r, th: np.ones_like(r)
    report = estimate_chain_check(plane, ones, ones, family)
    rows = []
    for row in report.rows:
        expected = 2.0 * math.pi / row["j"]
        rows.append({"j": row["j"], "energy": row["energy"], "expected": expected,
                     "relative_error": abs(row["energy"] - expected) / expected,
                     "middle_holds": row["middle_holds"], "final_holds": row["final_holds"]})
    passed = (all(r["relative_error"] < 0.01 and r["middle_holds"] and r["final_holds"] for r in rows)
              and report.ratio_variance < 1e-12)
    return CheckResult(7, "cutoff energies and estimate chain", passed,
                       f"E(phi_j) = 2 pi / j on the plane; var(u/v) = {report.ratio_variance:.1e}", rows)


def check_dirichlet_solver(settings: VerificationSettings) -> CheckResult:
    n = settings.dirichlet_grid
    rect = (0.0, 1.0, 0.0, 1.0)
    rows = []
    for a, b in ((0.5, 0.25), (-1.0, 0.0)):
        g = lambda y, z, a=a, b=b: a * y + b + 0.0 * z
        gf = solve_dirichlet(rect, g, shape=(n, n))
        Y, Z = gf.mesh()
        rows.append({"problem": f"u={a:g}y+{b:g}", "error": float(np.max(np.abs(gf.values - g(Y, Z)))),
                     "rate": newton_rate(gf.solver["residual_sup"]), "min_eta_x": gf.solver["min_eta_x"]})
    eps = 0.05
    g = lambda y, z: 0.5 * y + eps * np.sin(np.pi * y + 0.3) * np.sin(np.pi * z + 0.7)
    gf = solve_dirichlet(rect, g, shape=(n, n))
    Y, Z = gf.mesh()
    rows.append({"problem": "perturbed", "error": float(np.max(np.abs(gf.values - 0.5 * Y))),
                 "rate": newton_rate(gf.solver["residual_sup"]), "min_eta_x": gf.solver["min_eta_x"]})
    affine_ok = all(r["error"] < 1e-10 for r in rows[:2])
    perturbed = rows[-1]
    passed = (affine_ok and perturbed["rate"] is not None and perturbed["rate"] < 0.1
              and perturbed["error"] < 10.0 * eps and all(r["min_eta_x"] > 0.0 for r in rows))
    return CheckResult(8, "Dirichlet solver", passed,
                       "affine data recovered; quadratic final step on perturbed data; <eta, X> never vanishes",
                       rows)


def _example(name: str, value, expected, tolerance: float) -> dict:
    """One worked example: sup-norm error against the expected value and its tolerance."""
    value, expected = np.asarray(value, dtype=float), np.asarray(expected, dtype=float)
    error = float(np.max(np.abs(value - expected)))
    scalar = value.ndim == 0 and expected.ndim == 0
    return {"example": name, "value": float(value) if scalar else None,
            "expected": float(expected) if scalar else None,
            "error": error, "tolerance": tolerance, "passed": error <= tolerance}


def check_worked_examples(settings: VerificationSettings) -> CheckResult:
    """Worked examples of the curvature, Killing, PDE and consistency operations."""
    rows = []
    origin = np.zeros(3)
    for kappa, tau in ((0.0, 0.5), (-1.0, 1.0), (1.0, 0.0)):
        sp = SpaceParams(kappa, tau)
        rows.append(_example(f"K(E1,E2) in E({kappa:g},{tau:g})",
                             sectional_curvature(sp, origin, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
                             kappa - 3.0 * tau ** 2, 1e-6))
        rows.append(_example(f"Ric(E3) in E({kappa:g},{tau:g})", ricci(sp, origin, [0.0, 0.0, 1.0]),
                             2.0 * tau ** 2, 1e-6))
    nil = SpaceParams(0.0, 0.5)
    pts = np.array([[0.3, -0.2, 0.1], [1.0, 2.0, -1.0]])
    rows.append(_example("Killing residual of X", killing_residual(nil, killing_fields(nil).X, pts), 0.0, 1e-6))
    square = lambda y, z: (y * y, 2.0 * y, 0.0 * z, 2.0 + 0.0 * y, 0.0 * y, 0.0 * y)
    gf = GraphFunction.from_closed_form(square, (-1.0, 1.0, -1.0, 1.0), (3, 3), name="y^2")
    rows.append(_example("residual of y^2 at the origin", residual(gf).values[0, 0], 2.0, 1e-6))
    rows.append(_example("max |H| on the plane u=y+1",
                         consistency_vs_mean_curvature(plane_solution(1.0, 1.0, shape=(17, 17))).max_abs_h,
                         0.0, 1e-6))
    passed = all(r["passed"] for r in rows)
    return CheckResult(9, "worked examples", passed, "sectional, Ricci, Killing and PDE examples", rows)


def check_frame_examples(settings: VerificationSettings) -> CheckResult:
    rows = []
    nil = SpaceParams(0.0, 0.5)
    x, y, z = 0.7, -1.3, 2.0
    origin = np.zeros(3)
    omega = np.array([y / 2.0, -x / 2.0, 1.0])
    rows.append(_example("Nil metric at the origin", metric_at(nil, origin), np.eye(3), 0.0))
    rows.append(_example("Nil metric dx^2+dy^2+(dz+(y dx-x dy)/2)^2", metric_at(nil, [x, y, z]),
                         np.diag([1.0, 1.0, 0.0]) + np.outer(omega, omega), 1e-12))
    frame = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-y / 2.0, x / 2.0, 1.0]])
    rows.append(_example("Nil frame E1=dx-(y/2)dz, E2=dy+(x/2)dz, E3=dz", frame_matrix(nil, [x, y, z]),
                         frame, 1e-12))
    rows.append(_example("frame of E(-1,0) at the origin", frame_matrix(SpaceParams(-1.0, 0.0), origin),
                         np.eye(3), 0.0))

    table = connection_coefficients(nil)
    rows.append(_example("Nil Gamma_12^3", table[0, 1, 2], 0.5, 0.0))
    rows.append(_example("Nil Gamma_32^1 = tau - sigma", table[2, 1, 0], 0.5, 0.0))
    rows.append(_example("E(-1,1/2) Gamma_32^1 = tau - sigma", connection_coefficients(SpaceParams(-1.0, 0.5))[2, 1, 0],
                         1.5, 0.0))

    points = np.array([[0.0, 0.0, 0.0], [0.3, -0.4, 1.2], [-0.7, 0.5, -2.0]])
    for tau in (0.5, 1.0):
        sp = SpaceParams(0.0, tau)
        e1, e2, e3 = (constant_frame_field(sp, i) for i in range(3))
        nabla11 = [covariant_derivative(sp, e1, e1, p) for p in points]
        nabla12 = [covariant_derivative(sp, e1, e2, p) for p in points]
        rows.append(_example(f"nabla_E1 E1 = 0 in E(0,{tau:g})", nabla11, np.zeros((3, 3)), 1e-8))
        rows.append(_example(f"nabla_E1 E2 = tau E3 in E(0,{tau:g})", nabla12,
                             [tau * e3(p) for p in points], 1e-8))

    y_nodes, z_nodes = np.meshgrid(np.linspace(-1.0, 1.0, 9), np.linspace(-1.0, 1.0, 9), indexing="ij")
    u = 0.3 * y_nodes + 0.2
    start = np.stack([np.zeros_like(y_nodes), y_nodes, z_nodes], -1)
    rows.append(_example("phi_u(0,y,z) = (u, y, z + uy/2)", killing_fields(nil).flow(u, start),
                         vertical_plane(nil, 0.3, 0.2)(y_nodes, z_nodes), 1e-12))
    passed = all(r["passed"] for r in rows)
    return CheckResult(10, "metric, frame and connection examples", passed,
                       "Nil metric and frame, connection table, nabla_E1 E1 and nabla_E1 E2, flow of X", rows)


def check_surface_examples(settings: VerificationSettings) -> CheckResult:
    nil = SpaceParams(0.0, 0.5)
    y, z = np.meshgrid(np.linspace(-1.0, 1.0, 9), np.linspace(-1.0, 1.0, 9), indexing="ij")
    rows = [
        _example(f"H on the vertical plane Pi_{{{a:g},{b:g}}}",
                 fundamental_forms(vertical_plane(nil, a, b), y, z, intrinsic=False).H, 0.0, 1e-8)
        for a, b in ((0.0, 0.0), (1.0, 0.5))
    ]
    s, t = np.meshgrid(np.linspace(0.0, 1.0, 5), np.linspace(0.0, 1.0, 5), indexing="ij")
    for kappa, tau, k in ((-1.0, 0.5, 1.0), (0.0, 0.5, 1.0), (1.0, 1.0, 0.5), (-1.0, 0.0, 0.0)):
        imm = cylinder_immersion(SpaceParams(kappa, tau), k)
        forms = fundamental_forms(imm, s, t, intrinsic=False)
        label = f"cylinder(kappa={kappa:g},tau={tau:g},k={k:g})"
        rows.append(_example(f"eta3 on {label}", jacobi_candidates(imm, s, t)["eta3"], 0.0, 1e-10))
        rows.append(_example(f"|A|^2 = k^2 + 2 tau^2 on {label}", forms.A_norm_sq, k * k + 2.0 * tau * tau, 1e-8))
        rows.append(_example(f"Ric(eta) = kappa - 2 tau^2 on {label}", forms.ricci_normal,
                             kappa - 2.0 * tau * tau, 1e-8))
        rows.append(_example(f"q = k^2 + kappa on {label}", potential_q(imm, s, t), k * k + kappa, 1e-8))
    passed = all(r["passed"] for r in rows)
    return CheckResult(11, "surface examples", passed,
                       "vertical planes are minimal; cylinders have eta3 = 0 and q = k^2 + kappa", rows)


def check_jacobi_identities(settings: VerificationSettings) -> CheckResult:
    n = settings.fmp_grid
    tol = settings.jacobi_tolerance
    imm = fmp_surface(0.5)
    rows = []
    candidates = {
        "<eta, X_pi/2>": lambda s, t: jacobi_candidates(imm, s, t)["X_alpha"][math.pi / 2],
        "eta3": lambda s, t: jacobi_candidates(imm, s, t)["eta3"],
    }
    for name, fun in candidates.items():
        u = ScalarFieldGrid.from_function(fun, imm.rect, (n, n))
        rows.append(_example(f"|L u| / |u| for u = {name}", jacobi_residual(imm, u) / u.l2_norm(), 0.0, tol))
        square = u.with_values(u.values ** 2)
        rows.append(_example(f"|L(u^2) - (2|grad u|^2 - q u^2)| / |u^2| for u = {name}",
                             composite_identity_residual(imm, u, lambda v: v ** 2, lambda v: 2.0 * v,
                                                         lambda v: 2.0 + 0.0 * v) / square.l2_norm(),
                             0.0, tol))
    passed = all(r["passed"] for r in rows)
    return CheckResult(12, "Jacobi identities", passed,
                       f"Killing normal components are Jacobi functions on M_0.5 at {n}x{n}; "
                       "L(u^2) = 2|grad u|^2 - q u^2", rows)


def check_curvature_command(settings: VerificationSettings) -> CheckResult:
    result = compute_curvature(SpaceParams(0.0, 0.5), {"family": "cylinder", "k": 1.0}, grid=9, write=False)
    if result["status"] != "success":
        return CheckResult(13, "curvature command example", False, result["message"])
    rows = []
    for key, expected, tol in (("H", 0.5, 1e-8), ("K", 0.0, 1e-6), ("K_ext", -0.25, 1e-8)):
        stats = result[key]
        rows.append(_example(f"{key} of the Nil cylinder k=1", [stats["min"], stats["max"]],
                             [expected, expected], tol))
    passed = all(r["passed"] for r in rows)
    return CheckResult(13, "curvature command example", passed,
                       "curvature --space kappa=0,tau=0.5 --surface cylinder:k=1", rows)


CHECKS = (
    check_cylinder_geometry,
    check_eigenvalue_formula,
    check_stability_verdicts,
    check_pde_exactness,
    check_tangency_determinant,
    check_potential_identity,
    check_cutoff_chain,
    check_dirichlet_solver,
    check_worked_examples,
    check_frame_examples,
    check_surface_examples,
    check_jacobi_identities,
    check_curvature_command,
)


def _run_check(check, settings: VerificationSettings) -> CheckResult:
    start = time.perf_counter()
    try:
        result = check(settings)
    except Exception as e:
        failure = error_result(e)
        number = CHECKS.index(check) + 1
        result = CheckResult(number, check.__name__.removeprefix("check_").replace("_", " "), False,
                             f"{failure['error_kind']} error: {failure['message']}")
    level = logging.INFO if result.passed else logging.WARNING
    logger.log(level, "check %d (%s): %s in %.1f s", result.number, result.name,
               "pass" if result.passed else "FAIL", time.perf_counter() - start)
    return result


def verify_all(settings: VerificationSettings | None = None, report: str = "md", write: bool = True) -> dict:
    """Run the acceptance suite.

    Args:
        settings: Grid sizes; the defaults reproduce the acceptance sizes.
        report: ``md`` or ``pdf`` (the Markdown report is always written).
        write: Write ``verification.json`` / ``verification.csv`` and the report.

    Returns:
        dict: ``status`` success when every check passes, otherwise an error with
        ``error_kind`` validation; ``checks`` lists every result either way.
    """
    settings = settings or VerificationSettings()
    results = [_run_check(check, settings) for check in CHECKS]
    failed = [r for r in results if not r.passed]
    summary = {
        "command": "verify-all",
        "settings": asdict(settings),
        "passed": not failed,
        "checks": [dict(r.summary(), rows=r.rows) for r in results],
    }
    if write:
        table = pd.DataFrame([r.summary() for r in results])
        summary["artifacts"] = write_artifacts("verification", summary, table)
        sections = [{"heading": f"{r.number}. {r.name}", "passed": r.passed, "content": r.detail, "rows": r.rows}
                    for r in results]
        title = "ektau verification"
        md = generate_markdown_report(title, sections)
        if md["status"] == "success":
            summary["artifacts"].append(md["report_path"])
        if report == "pdf":
            pdf = generate_pdf_report(title, sections)
            if pdf["status"] == "success":
                summary["artifacts"].append(pdf["report_path"])
    if failed:
        names = ", ".join(str(r.number) for r in failed)
        return {"status": "error", "error_kind": "validation",
                "message": f"acceptance checks failed: {names}", **summary}
    return {"status": "success", **summary}
