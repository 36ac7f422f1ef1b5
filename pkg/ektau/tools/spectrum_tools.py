"""
Spectrum tools — first eigenvalue of the stability operator and cylinder stability sweeps.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor

import pandas as pd

from ..core.errors import ConfigError, error_result
from ..core.space import SpaceParams
from ..core.spectra import (
    SpectralProblem,
    cylinder_stability_verdict,
    first_eigenvalue,
    lambda1_formula,
)
from ..utils.state_manager import write_artifacts
from .curvature_tools import domain_rectangle
from .file_tools import build_surface

logger = logging.getLogger(__name__)

DEFAULT_GRID = 64
SWEEP_GRID = 48
DEFAULT_SWEEP = ((1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (6.0, 6.0), (8.0, 8.0))


def compute_spectrum(space: SpaceParams, surface: dict, domain: tuple[float, float] | None = None,
                     grid: int | None = None, write: bool = True) -> dict:
    """lambda1 of -L = -(Delta + q) with zero boundary values on a parameter rectangle.

    Args:
        space: The ambient E(kappa, tau).
        surface: Surface spec dict.
        domain: ``(a, b)``; the rectangle is [0,a]x[0,b] for cylinders.
        grid: Interior nodes per direction.
        write: Write ``spectrum.json`` and the eigenfunction as ``spectrum.csv``.

    Returns:
        dict: The flat record (lambda1, k_gamma, kappa, tau, domain, grid, residual),
        the Dirichlet Laplacian eigenvalue, iteration data and, for cylinders, the
        closed-form value.
    """
    try:
        grid = grid or DEFAULT_GRID
        rect = domain_rectangle(surface["family"], domain)
        imm = build_surface(space, surface, rect)
        problem = SpectralProblem.from_immersion(imm, rect or imm.rect, (grid, grid))
        result = first_eigenvalue(problem)
        laplace = first_eigenvalue(problem.laplacian_only())

        s0, s1, t0, t1 = problem.rect
        summary = {
            "command": "spectrum",
            "kappa": space.kappa,
            "tau": space.tau,
            "k_gamma": float(surface["k"]) if surface["family"] == "cylinder" else None,
            "domain": [s1 - s0, t1 - t0],
            "space": space.to_dict(),
            "surface": dict(surface),
            "rect": list(problem.rect),
            "grid": [grid, grid],
            "lambda1": result.lambda1,
            "lambda1_laplacian": laplace.lambda1,
            "iterations": result.iterations,
            "residual": result.residual,
        }
        if surface["family"] == "cylinder":
            formula = lambda1_formula(space, summary["k_gamma"], s1 - s0, t1 - t0)
            summary["formula"] = formula
            summary["relative_error"] = abs(result.lambda1 - formula) / max(abs(formula), 1e-300)

        f = result.eigenfunction
        S, T = f.mesh()
        table = pd.DataFrame({"s": S.ravel(), "t": T.ravel(), "f": f.values.ravel()})
        if write:
            summary["artifacts"] = write_artifacts("spectrum", summary, table)
        return {"status": "success", **summary}
    except Exception as e:
        return error_result(e)


def stability_sweep(space: SpaceParams, surface: dict, sweep=None, grid: int | None = None,
                    jobs: int = 1, write: bool = True) -> dict:
    """Stable / unstable / marginal verdict for a vertical cylinder over growing rectangles.

    Args:
        space: The ambient E(kappa, tau).
        surface: A cylinder spec (``{"family": "cylinder", "k": ...}``).
        sweep: Rectangles ``[(a, b), ...]`` in increasing size.
        grid: Interior nodes per direction for every rectangle.
        jobs: Worker processes evaluating rectangles in parallel.
        write: Write ``stability-sweep.json`` / ``stability-sweep.csv``.

    Returns:
        dict: Verdict, witness rectangle (if unstable), fitted infimum and the table.
    """
    try:
        if surface.get("family") != "cylinder":
            raise ConfigError("stability sweeps are defined for cylinder surfaces", field="surface.family")
        k = float(surface["k"])
        sweep = [tuple(map(float, d)) for d in (sweep or DEFAULT_SWEEP)]
        grid = grid or SWEEP_GRID
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                verdict = cylinder_stability_verdict(space, k, sweep, grid, mapper=pool.map)
        else:
            verdict = cylinder_stability_verdict(space, k, sweep, grid)

        summary = {
            "command": "stability-sweep",
            "space": space.to_dict(),
            "surface": dict(surface),
            "grid": [grid, grid],
            **verdict.to_dict(),
        }
        logger.info("cylinder k=%g in E(%g,%g): %s", k, space.kappa, space.tau, verdict.verdict)
        table = pd.DataFrame(verdict.rows, columns=["a", "b", "lambda1", "formula", "iterations", "residual"])
        if write:
            summary["artifacts"] = write_artifacts("stability-sweep", summary, table)
        return {"status": "success", **summary, "rows": verdict.rows}
    except Exception as e:
        return error_result(e)
