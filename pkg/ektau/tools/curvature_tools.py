"""
Curvature tools — fundamental forms, curvatures and Jacobi candidates over a surface.
"""

from __future__ import annotations

import logging

import numpy as np
import pandas as pd

from ..core.errors import error_result
from ..core.space import SpaceParams
from ..core.surfaces import (
    Immersion,
    fundamental_forms,
    gauss_residual,
    jacobi_candidates,
    potential_identity_residual,
)
from ..utils.state_manager import write_artifacts
from .file_tools import build_surface

logger = logging.getLogger(__name__)

DEFAULT_GRID = 33


def domain_rectangle(family: str, domain: tuple[float, float] | None):
    """Parameter rectangle for ``--domain AxB``: [0,a]x[0,b] for cylinders, centred otherwise."""
    if domain is None:
        return None
    a, b = domain
    if family == "cylinder":
        return (0.0, a, 0.0, b)
    return (-a / 2.0, a / 2.0, -b / 2.0, b / 2.0)


def _stats(values: np.ndarray) -> dict:
    return {"min": float(np.min(values)), "max": float(np.max(values)), "mean": float(np.mean(values))}


def surface_curvature_table(imm: Immersion, grid: int = DEFAULT_GRID) -> pd.DataFrame:
    """One row per parameter node: position, curvatures, angle function and potential."""
    S, T = imm.node_grid((grid, grid))
    forms = fundamental_forms(imm, S, T)
    table = {
        "s": S.ravel(),
        "t": T.ravel(),
        "x": forms.point[..., 0].ravel(),
        "y": forms.point[..., 1].ravel(),
        "z": forms.point[..., 2].ravel(),
        "H": forms.H.ravel(),
        "K": forms.K.ravel(),
        "K_ext": forms.K_ext.ravel(),
        "K_ambient": forms.ambient_curvature.ravel(),
        "angle": forms.angle.ravel(),
        "q": (forms.A_norm_sq + forms.ricci_normal).ravel(),
        "gauss_residual": gauss_residual(forms).ravel(),
    }
    candidates = jacobi_candidates(imm, S, T)
    if "X" in candidates:
        table["eta_X"] = candidates["X"].ravel()
    return pd.DataFrame(table)


def compute_curvature(space: SpaceParams, surface: dict, grid: int | None = None,
                      domain: tuple[float, float] | None = None, write: bool = True) -> dict:
    """Evaluate the geometry of a surface on a parameter grid.

    Args:
        space: The ambient E(kappa, tau).
        surface: Surface spec dict (``{"family": "cylinder", "k": 1}`` and so on).
        grid: Nodes per parameter direction (ignored for custom grids).
        domain: Optional ``(a, b)`` parameter extents.
        write: Write ``curvature.json`` / ``curvature.csv``.

    Returns:
        dict: Summary statistics of H, K, K_ext, the second form at the centre node
        and the Gauss-equation and potential-identity residuals.
    """
    try:
        grid = grid or DEFAULT_GRID
        imm = build_surface(space, surface, domain_rectangle(surface["family"], domain))
        df = surface_curvature_table(imm, grid)

        S, T = imm.node_grid((grid, grid))
        ci, cj = S.shape[0] // 2, S.shape[1] // 2
        centre = fundamental_forms(imm, S[ci, cj], T[ci, cj], intrinsic=False)
        identity = potential_identity_residual(imm, S, T)

        summary = {
            "command": "curvature",
            "space": space.to_dict(),
            "surface": dict(surface),
            "name": imm.name,
            "rect": list(imm.rect),
            "grid": list(S.shape),
            "H": _stats(df["H"].to_numpy()),
            "K": _stats(df["K"].to_numpy()),
            "K_ext": _stats(df["K_ext"].to_numpy()),
            "angle": _stats(df["angle"].to_numpy()),
            "second_form_centre": centre.second.tolist(),
            "first_form_centre": centre.first.tolist(),
            "gauss_residual_max": float(np.max(np.abs(df["gauss_residual"].to_numpy()))),
            "potential_identity_max": float(np.max(np.abs(identity))),
        }
        if "eta_X" in df:
            summary["multigraph_margin"] = float(np.min(np.abs(df["eta_X"].to_numpy())))
        logger.info("curvature of %s: H in [%.6g, %.6g]", imm.name, summary["H"]["min"], summary["H"]["max"])
        if write:
            summary["artifacts"] = write_artifacts("curvature", summary, df)
        return {"status": "success", **summary}
    except Exception as e:
        return error_result(e)
