"""
PDE tools — the Dirichlet problem for horizontal minimal graphs in Nil3.
"""

from __future__ import annotations

import logging

import numpy as np
import pandas as pd

from ..core.errors import ConfigError, error_result
from ..core.horizontal_graphs import (
    GraphFunction,
    consistency_vs_mean_curvature,
    newton_rate,
    residual,
    solve_dirichlet,
)
from ..utils.state_manager import write_artifacts
from .file_tools import expression_function, load_boundary_csv

logger = logging.getLogger(__name__)

DEFAULT_GRID = 33


def boundary_data(boundary: dict):
    """Closed-form (``{"expression": "..."}``) or CSV (``{"csv": path}``) boundary values."""
    if "expression" in boundary:
        return expression_function(str(boundary["expression"]), "boundary.expression")
    if "csv" in boundary:
        return load_boundary_csv(boundary["csv"])
    raise ConfigError("boundary needs 'expression' or 'csv'", field="boundary")


def _solution_table(gf: GraphFunction) -> pd.DataFrame:
    Y, Z = gf.mesh()
    res = np.zeros(gf.shape)
    res[1:-1, 1:-1] = residual(gf).values
    return pd.DataFrame({"y": Y.ravel(), "z": Z.ravel(), "u": gf.values.ravel(), "residual": res.ravel()})


def solve_pde(boundary: dict, domain: tuple[float, float] | None = None, grid: int | None = None,
              tol: float = 1e-8, write: bool = True) -> dict:
    """Solve the minimal-graph equation on [0,a]x[0,b] with Dirichlet data.

    Args:
        boundary: ``{"expression": "0.5*y + 1"}`` or ``{"csv": "trace.csv"}``.
        domain: ``(a, b)``, default ``(1, 1)``.
        grid: Nodes per direction, boundary included.
        tol: Sup-norm residual target of the Newton iteration.
        write: Write ``pde-solve.json`` / ``pde-solve.csv``.

    Returns:
        dict: Residual norms, Newton history, min |<eta, X>| and, for closed-form data,
        the sup distance between the solution and the expression.
    """
    try:
        a, b = domain or (1.0, 1.0)
        rect = (0.0, a, 0.0, b)
        grid = grid or DEFAULT_GRID
        g = boundary_data(boundary)
        gf = solve_dirichlet(rect, g, shape=(grid, grid), tol=tol)
        res = residual(gf)
        consistency = consistency_vs_mean_curvature(gf, tol=max(tol, 1e-8) * 10.0)
        history = gf.solver["residual_sup"]

        summary = {
            "command": "pde-solve",
            "boundary": dict(boundary),
            "rect": list(rect),
            "grid": [grid, grid],
            "iterations": gf.solver["iterations"],
            "residual_norms": {"sup": res.sup, "l2": res.l2},
            "residual_history": history,
            "steps": gf.solver["steps"],
            "newton_rate": newton_rate(history),
            "min_eta_x": gf.solver["min_eta_x"],
            "max_abs_h": consistency.max_abs_h,
        }
        if "expression" in boundary:
            Y, Z = gf.mesh()
            summary["sup_distance_to_expression"] = float(np.max(np.abs(gf.values - g(Y, Z))))
        if write:
            summary["artifacts"] = write_artifacts("pde-solve", summary, _solution_table(gf))
        return {"status": "success", **summary}
    except Exception as e:
        return error_result(e)


def approximate_entire(expression: str, sizes=(1.0, 2.0, 4.0), grid: int = DEFAULT_GRID) -> dict:
    """Solve on growing squares centred at the origin with far-field data from ``expression``.

    An entire graph cannot be computed on a finite grid; the sup distance to the
    expression on each square shows whether the data itself is recovered.
    """
    try:
        g = expression_function(expression, "expression")
        rows = []
        for size in sizes:
            rect = (-size / 2.0, size / 2.0, -size / 2.0, size / 2.0)
            gf = solve_dirichlet(rect, g, shape=(grid, grid))
            Y, Z = gf.mesh()
            rows.append({
                "size": float(size),
                "iterations": gf.solver["iterations"],
                "sup_distance": float(np.max(np.abs(gf.values - g(Y, Z)))),
                "min_eta_x": gf.solver["min_eta_x"],
            })
        return {"status": "success", "expression": expression, "rows": rows}
    except Exception as e:
        return error_result(e)
