"""
Parabolicity tools — cutoff energies, the Jacobi-pair estimate chain and area growth.
"""

from __future__ import annotations

import logging
import math

import numpy as np
import pandas as pd

from ..core.errors import ConfigError, error_result
from ..core.parabolicity import (
    CutoffFamily,
    MetricGrid,
    area_growth,
    capacity_minimality,
    energy_scaling_exponent,
    estimate_chain_check,
    flat_cylinder,
    flat_plane,
    hyperbolic_plane,
)
from ..utils.state_manager import write_artifacts

logger = logging.getLogger(__name__)

MODELS = {
    "plane": (flat_plane, MetricGrid.plane, (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)),
    "cylinder": (flat_cylinder, MetricGrid.cylinder, (2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0)),
    "hyperbolic": (hyperbolic_plane, MetricGrid.hyperbolic_disk, (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)),
}

# (u, v) pairs in polar coordinates (r, theta)
PAIRS = {
    "constant": (lambda r, th: np.ones_like(r), lambda r, th: np.ones_like(r)),
    "linear": (lambda r, th: r * np.cos(th), lambda r, th: np.ones_like(r)),
    "gaussian": (lambda r, th: np.exp(-r * r), lambda r, th: np.ones_like(r)),
}


def run_parabolicity(model: str = "plane", count: int | None = None, r0: float = 1.0, radial_nodes: int = 256,
                     pair: str = "constant", write: bool = True) -> dict:
    """Cutoff energies, the estimate chain for a (u, v) pair and geodesic-ball growth.

    Args:
        model: ``plane``, ``cylinder`` or ``hyperbolic``.
        count: Number of cutoffs (R_j = e^j r0); 8 on flat models, 3 on the hyperbolic plane.
        r0: Inner radius of every cutoff.
        radial_nodes: Quadrature nodes per annulus.
        pair: ``constant``, ``linear`` or ``gaussian`` (not a Jacobi function).
        write: Write ``parabolicity.json``, ``parabolicity.csv`` and the growth table
            ``parabolicity-growth.csv`` (r, vol, ratio).

    Returns:
        dict: Energy table, chain report and growth report.
    """
    try:
        if model not in MODELS:
            raise ConfigError(f"unknown model '{model}', expected one of {sorted(MODELS)}", field="model")
        if pair not in PAIRS:
            raise ConfigError(f"unknown pair '{pair}', expected one of {sorted(PAIRS)}", field="pair")
        make_surface, make_grid, radii = MODELS[model]
        count = count or (3 if model == "hyperbolic" else 8)
        surface = make_surface()
        family = CutoffFamily.log_family(surface, r0, count, radial_nodes)
        u, v = PAIRS[pair]
        chain = estimate_chain_check(surface, u, v, family)

        rows = []
        for row in chain.rows:
            row = dict(row)
            row["log_width"] = math.log(row["R_j"] / row["r_j"])
            if model == "plane":
                row["expected"] = 2.0 * math.pi / row["log_width"]
            rows.append(row)
        growth = area_growth(make_grid(), (0.0, 0.0), radii)
        capacity = capacity_minimality(surface, r0, r0 * math.e ** 2, radial_nodes)

        summary = {
            "command": "parabolicity",
            "model": surface.name,
            "pair": pair,
            "energy_exponent": energy_scaling_exponent(family),
            "hypothesis_holds": chain.hypothesis_holds,
            "hypothesis_minimum": chain.hypothesis_minimum,
            "non_jacobi": chain.non_jacobi,
            "ratio_variance": chain.ratio_variance,
            "ratio_constant": chain.ratio_constant,
            "sup_u2": chain.sup_u2,
            "energies_trend_to_zero": chain.trend_to_zero,
            "chain_holds": all(r["middle_holds"] and r["final_holds"] for r in rows),
            "capacity": capacity,
            "growth": {
                "rows": growth.rows(),
                "exponent": growth.exponent,
                "at_most_quadratic": growth.at_most_quadratic,
                "truncated": growth.truncated,
            },
        }
        table = pd.DataFrame(rows)
        growth_table = pd.DataFrame(growth.rows(), columns=["r", "vol", "ratio"])
        if write:
            summary["artifacts"] = write_artifacts("parabolicity", summary, table,
                                                   extra_tables={"growth": growth_table})
        return {"status": "success", **summary, "rows": rows}
    except Exception as e:
        return error_result(e)
