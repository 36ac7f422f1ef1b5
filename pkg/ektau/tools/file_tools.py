"""
Configuration and input loading — JSON job configs, command-line shorthands,
CSV surfaces and boundary traces.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
import sympy

from ..core.errors import ConfigError
from ..core.horizontal_graphs import BoundaryTrace
from ..core.space import SpaceParams
from ..core.surfaces import (
    Immersion,
    cylinder_immersion,
    fmp_surface,
    horizontal_graph_immersion,
    vertical_plane,
)

SCHEMA_VERSION = 1
SURFACE_FAMILIES = ("cylinder", "fmp", "horizontal_graph", "vertical_plane", "custom_grid")
PARABOLICITY_KEYS = {"model": str, "pair": str, "count": int, "r0": float, "radial_nodes": int}


@dataclass
class JobConfig:
    """Everything a subcommand needs; built from a JSON file and/or flags."""

    command: str = ""
    space: SpaceParams | None = None
    surface: dict = field(default_factory=dict)
    domain: tuple[float, float] | None = None
    grid: int | None = None
    sweep: list[tuple[float, float]] = field(default_factory=list)
    boundary: dict = field(default_factory=dict)
    output_dir: str = ""
    tolerances: dict = field(default_factory=dict)
    jobs: int = 1
    parabolicity: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.tolerances.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
                raise ConfigError("tolerances must be positive numbers", field=f"tolerances.{name}")
        if self.jobs < 1:
            raise ConfigError("--jobs must be at least 1", field="jobs")


def _number(text: str, name: str) -> float:
    try:
        value = float(sympy.sympify(text.strip()))
    except (sympy.SympifyError, TypeError, ValueError) as e:
        raise ConfigError(f"'{text}' is not a number", field=name) from e
    if not math.isfinite(value):
        raise ConfigError(f"'{text}' is not finite", field=name)
    return value


def parse_key_values(text: str, name: str) -> dict[str, float]:
    """'kappa=0,tau=0.5' -> {'kappa': 0.0, 'tau': 0.5}."""
    out: dict[str, float] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ConfigError(f"expected key=value, got '{part}'", field=name)
        key, value = (s.strip() for s in part.split("=", 1))
        out[key] = _number(value, f"{name}.{key}")
    return out


def parse_space(text: str) -> SpaceParams:
    """Parse ``--space kappa=0,tau=0.5``."""
    return SpaceParams.from_dict(parse_key_values(text, "space"))


def parse_surface(text: str) -> dict:
    """Parse ``--surface cylinder:k=1`` into a surface spec dict."""
    family, _, rest = text.partition(":")
    spec: dict[str, Any] = {"family": family.strip()}
    if spec["family"] == "custom_grid":
        spec["csv"] = rest.strip()
    elif spec["family"] == "horizontal_graph":
        key, _, expr = rest.partition("=")
        if key.strip() != "u" or not expr.strip():
            raise ConfigError("expected horizontal_graph:u=<expression in y, z>", field="surface.u")
        spec["u"] = expr.strip()
    else:
        spec.update(parse_key_values(rest, "surface"))
    return validate_surface_spec(spec)


def parse_domain(text: str) -> tuple[float, float]:
    """Parse ``--domain 2x1``."""
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"domain must look like AxB, got '{text}'", field="domain")
    a, b = (_number(p, "domain") for p in parts)
    if a <= 0 or b <= 0:
        raise ConfigError("domain sides must be positive", field="domain")
    return a, b


def validate_surface_spec(spec: dict) -> dict:
    family = spec.get("family")
    if family not in SURFACE_FAMILIES:
        raise ConfigError(f"unknown surface family '{family}', expected one of {SURFACE_FAMILIES}",
                          field="surface.family")
    required = {"cylinder": ("k",), "fmp": ("theta",), "vertical_plane": ("a", "b"),
                "horizontal_graph": ("u",), "custom_grid": ("csv",)}[family]
    for key in required:
        if key not in spec:
            raise ConfigError(f"surface family '{family}' needs '{key}'", field=f"surface.{key}")
    return spec


def validate_parabolicity_settings(settings: dict) -> dict:
    """The ``parabolicity`` section: model, pair, count, r0, radial_nodes."""
    if not isinstance(settings, dict):
        raise ConfigError("parabolicity settings must be an object", field="parabolicity")
    unknown = sorted(set(settings) - set(PARABOLICITY_KEYS))
    if unknown:
        raise ConfigError("unknown parabolicity setting", field=f"parabolicity.{unknown[0]}")
    for key, value in settings.items():
        kind = PARABOLICITY_KEYS[key]
        if kind is str:
            ok = isinstance(value, str)
        elif kind is int:
            ok = isinstance(value, int) and not isinstance(value, bool) and value >= 1
        else:
            ok = isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0
        if not ok:
            raise ConfigError(f"invalid value {value!r}", field=f"parabolicity.{key}")
    return dict(settings)


def load_job_config(path: str) -> JobConfig:
    """Read a ``"schema": 1`` JSON job file."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}", field="config")
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    if not isinstance(data, dict):
        raise ConfigError("the config must be a JSON object", field="<root>")
    if data.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema {data.get('schema')!r}, expected {SCHEMA_VERSION}", field="schema")

    known = {"schema", "command", "space", "surface", "domain", "grid", "sweep", "boundary",
             "output_dir", "tolerances", "jobs", "parabolicity"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError("unknown key", field=unknown[0])

    base = os.path.dirname(os.path.abspath(path))
    space = SpaceParams.from_dict(data["space"]) if "space" in data else None
    surface = validate_surface_spec(dict(data["surface"])) if "surface" in data else {}
    if surface.get("family") == "custom_grid" and not os.path.isabs(surface["csv"]):
        surface["csv"] = os.path.join(base, surface["csv"])
    boundary = dict(data.get("boundary", {}))
    if "csv" in boundary and not os.path.isabs(boundary["csv"]):
        boundary["csv"] = os.path.join(base, boundary["csv"])

    domain = data.get("domain")
    if domain is not None:
        if not (isinstance(domain, list) and len(domain) == 2 and all(isinstance(v, (int, float)) for v in domain)):
            raise ConfigError("domain must be [a, b]", field="domain")
        domain = (float(domain[0]), float(domain[1]))
    grid = data.get("grid")
    if grid is not None and (not isinstance(grid, int) or isinstance(grid, bool) or grid < 1):
        raise ConfigError("grid must be a positive integer", field="grid")
    sweep = [tuple(float(v) for v in pair) for pair in data.get("sweep", [])]
    return JobConfig(
        command=data.get("command", ""),
        space=space,
        surface=surface,
        domain=domain,
        grid=grid,
        sweep=sweep,
        boundary=boundary,
        output_dir=data.get("output_dir", ""),
        tolerances=dict(data.get("tolerances", {})),
        jobs=int(data.get("jobs", 1)),
        parabolicity=validate_parabolicity_settings(data.get("parabolicity", {})),
    )


_Y, _Z = sympy.symbols("y z")


def expression_function(text: str, name: str = "expression"):
    """Closed-form numpy function of (y, z) from an expression string such as '0.5*y + sin(pi*z)'."""
    try:
        expr = sympy.sympify(text, locals={"y": _Y, "z": _Z})
    except (sympy.SympifyError, TypeError) as e:
        raise ConfigError(f"cannot parse '{text}'", field=name) from e
    extra = expr.free_symbols - {_Y, _Z}
    if extra:
        raise ConfigError(f"unknown symbol {sorted(map(str, extra))[0]} (only y and z allowed)", field=name)
    fun = sympy.lambdify((_Y, _Z), expr, "numpy")
    return lambda y, z: np.broadcast_to(fun(y, z), np.broadcast(y, z).shape).astype(float)


def graph_jet_function(text: str, name: str = "surface.u"):
    """u(y, z) with its exact first and second derivatives, for horizontal graphs."""
    expr = sympy.sympify(text, locals={"y": _Y, "z": _Z})
    extra = expr.free_symbols - {_Y, _Z}
    if extra:
        raise ConfigError(f"unknown symbol {sorted(map(str, extra))[0]}", field=name)
    parts = [expr, sympy.diff(expr, _Y), sympy.diff(expr, _Z), sympy.diff(expr, _Y, 2),
             sympy.diff(expr, _Y, _Z), sympy.diff(expr, _Z, 2)]
    funs = [sympy.lambdify((_Y, _Z), p, "numpy") for p in parts]

    def jet(y, z):
        shape = np.broadcast(y, z).shape
        return tuple(np.broadcast_to(f(y, z), shape).astype(float) for f in funs)

    return jet


def load_surface_csv(space: SpaceParams, path: str) -> Immersion:
    """Custom grid surface from CSV rows (s, t, x, y, z)."""
    if not os.path.exists(path):
        raise ConfigError(f"surface CSV not found: {path}", field="surface.csv")
    df = pd.read_csv(path)
    missing = [c for c in ("s", "t", "x", "y", "z") if c not in df.columns]
    if missing:
        raise ConfigError(f"surface CSV lacks column '{missing[0]}'", field="surface.csv")
    df = df.sort_values(["s", "t"], kind="mergesort")
    s = np.unique(df["s"].to_numpy(float))
    t = np.unique(df["t"].to_numpy(float))
    if len(df) != len(s) * len(t):
        raise ConfigError("surface CSV must cover a full (s, t) grid", field="surface.csv")
    xyz = df[["x", "y", "z"]].to_numpy(float).reshape(len(s), len(t), 3)
    return Immersion.from_samples(space, s, t, xyz, name=os.path.basename(path))


def load_boundary_csv(path: str) -> BoundaryTrace:
    """Boundary trace from CSV rows (y, z, g)."""
    if not os.path.exists(path):
        raise ConfigError(f"boundary CSV not found: {path}", field="boundary.csv")
    df = pd.read_csv(path)
    missing = [c for c in ("y", "z", "g") if c not in df.columns]
    if missing:
        raise ConfigError(f"boundary CSV lacks column '{missing[0]}'", field="boundary.csv")
    return BoundaryTrace(df["y"].to_numpy(float), df["z"].to_numpy(float), df["g"].to_numpy(float))


def build_surface(space: SpaceParams, spec: dict, rect=None) -> Immersion:
    """Immersion for a validated surface spec."""
    spec = validate_surface_spec(spec)
    family = spec["family"]
    if family == "cylinder":
        return cylinder_immersion(space, float(spec["k"]), rect or (0.0, 1.0, 0.0, 1.0))
    if family == "fmp":
        if (space.kappa, space.tau) != (0.0, 0.5):
            raise ConfigError("FMP surfaces live in Nil3 = E(0, 1/2)", field="space")
        return fmp_surface(float(spec["theta"]), rect or (-1.0, 1.0, -1.0, 1.0))
    if family == "vertical_plane":
        return vertical_plane(space, float(spec["a"]), float(spec["b"]), rect or (-1.0, 1.0, -1.0, 1.0))
    if family == "horizontal_graph":
        return horizontal_graph_immersion(space, graph_jet_function(str(spec["u"])),
                                          rect or (-1.0, 1.0, -1.0, 1.0), name=f"graph({spec['u']})")
    return load_surface_csv(space, spec["csv"])
