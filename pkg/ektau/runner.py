"""
ektau runner — one command-line surface over every tool.

Each subcommand resolves a JobConfig (JSON file first, flags on top), calls
the matching tool and maps its status dict to the exit code: 0 on success,
1 on validation failures, 2 on solver errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .core.errors import ConfigError, error_result
from .tools.curvature_tools import compute_curvature
from .tools.file_tools import (
    PARABOLICITY_KEYS,
    JobConfig,
    load_job_config,
    parse_domain,
    parse_space,
    parse_surface,
    validate_parabolicity_settings,
)
from .tools.parabolicity_tools import MODELS, PAIRS, run_parabolicity
from .tools.pde_tools import solve_pde
from .tools.spectrum_tools import compute_spectrum, stability_sweep
from .tools.verify_tools import VerificationSettings, verify_all
from .utils.state_manager import OUTPUTS_DIR, configure_logging, set_output_dir, to_jsonable

logger = logging.getLogger(__name__)

COMMANDS = ("curvature", "spectrum", "stability-sweep", "parabolicity", "pde-solve", "verify-all")
EXIT_CODES = {"validation": 1, "solver": 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ektau", description="Numerical geometry workbench for E(kappa, tau) spaces.")
    parser.add_argument("--log-level", choices=("error", "info", "debug"), default=None,
                        help="overrides EKTAU_LOG")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, surface=True, grid=True):
        p.add_argument("--config", help="JSON job file with \"schema\": 1")
        p.add_argument("--output-dir", help=f"artifact directory (default {OUTPUTS_DIR})")
        if surface:
            p.add_argument("--space", help="kappa=<real>,tau=<real>")
            p.add_argument("--surface", help="family:key=value,... e.g. cylinder:k=1")
        p.add_argument("--domain", help="AxB parameter extents")
        if grid:
            p.add_argument("--grid", type=int, help="nodes per direction")
        return p

    common(sub.add_parser("curvature", help="fundamental forms and curvatures"))
    common(sub.add_parser("spectrum", help="first eigenvalue of the stability operator"))
    sweep = common(sub.add_parser("stability-sweep", help="cylinder stability over growing rectangles"))
    sweep.add_argument("--jobs", type=int, default=None, help="worker processes")

    para = sub.add_parser("parabolicity", help="cutoff energies, estimate chain, area growth")
    para.add_argument("--output-dir")
    para.add_argument("--config")
    para.add_argument("--model", choices=sorted(MODELS), default=None, help="default plane")
    para.add_argument("--pair", choices=sorted(PAIRS), default=None, help="default constant")
    para.add_argument("--count", type=int, default=None)
    para.add_argument("--r0", type=float, default=None, help="inner cutoff radius (default 1)")
    para.add_argument("--radial-nodes", type=int, default=None, help="quadrature nodes per annulus")

    pde = common(sub.add_parser("pde-solve", help="Dirichlet problem for horizontal minimal graphs"), surface=False)
    pde.add_argument("--boundary", help="closed-form boundary values in y, z")
    pde.add_argument("--boundary-csv", help="CSV trace with columns y,z,g")

    verify = sub.add_parser("verify-all", help="run the acceptance suite")
    verify.add_argument("--output-dir")
    verify.add_argument("--report", choices=("md", "pdf"), default="md")
    verify.add_argument("--quick", action="store_true", help="reduced grids")
    return parser


def resolve_config(args: argparse.Namespace) -> JobConfig:
    """Config file values overridden by explicit flags."""
    cfg = load_job_config(args.config) if getattr(args, "config", None) else JobConfig()
    if cfg.command and cfg.command != args.command:
        raise ConfigError(f"config is for '{cfg.command}', not '{args.command}'", field="command")
    updates = {"command": args.command}
    if getattr(args, "space", None):
        updates["space"] = parse_space(args.space)
    if getattr(args, "surface", None):
        updates["surface"] = parse_surface(args.surface)
    if getattr(args, "domain", None):
        updates["domain"] = parse_domain(args.domain)
    if getattr(args, "grid", None) is not None:
        if args.grid < 1:
            raise ConfigError("--grid must be positive", field="grid")
        updates["grid"] = args.grid
    if getattr(args, "jobs", None) is not None:
        updates["jobs"] = args.jobs
    if getattr(args, "output_dir", None):
        updates["output_dir"] = args.output_dir
    if getattr(args, "boundary", None):
        updates["boundary"] = {"expression": args.boundary}
    if getattr(args, "boundary_csv", None):
        updates["boundary"] = {"csv": args.boundary_csv}
    if args.command == "parabolicity":
        flags = {key: getattr(args, key) for key in PARABOLICITY_KEYS if getattr(args, key) is not None}
        updates["parabolicity"] = validate_parabolicity_settings({**cfg.parabolicity, **flags})
    return replace(cfg, **updates)


def _require(cfg: JobConfig, *names: str):
    for name in names:
        if not getattr(cfg, name):
            raise ConfigError(f"'{cfg.command}' needs --{name} or a '{name}' entry in the config", field=name)


def dispatch(cfg: JobConfig, args: argparse.Namespace) -> dict:
    if cfg.jobs > 1 and cfg.command != "stability-sweep":
        logger.info("jobs=%d ignored: only stability-sweep evaluates in parallel", cfg.jobs)
    if cfg.command == "curvature":
        _require(cfg, "space", "surface")
        return compute_curvature(cfg.space, cfg.surface, cfg.grid, cfg.domain)
    if cfg.command == "spectrum":
        _require(cfg, "space", "surface")
        return compute_spectrum(cfg.space, cfg.surface, cfg.domain, cfg.grid)
    if cfg.command == "stability-sweep":
        _require(cfg, "space", "surface")
        return stability_sweep(cfg.space, cfg.surface, cfg.sweep or None, cfg.grid, cfg.jobs)
    if cfg.command == "parabolicity":
        settings = cfg.parabolicity
        return run_parabolicity(settings.get("model", "plane"), settings.get("count"), settings.get("r0", 1.0),
                                settings.get("radial_nodes", 256), pair=settings.get("pair", "constant"))
    if cfg.command == "pde-solve":
        _require(cfg, "boundary")
        return solve_pde(cfg.boundary, cfg.domain, cfg.grid, tol=cfg.tolerances.get("newton", 1e-8))
    settings = VerificationSettings.quick() if args.quick else VerificationSettings()
    return verify_all(settings, report=args.report)


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run one subcommand and return the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        configure_logging()
        logger.error("usage: %s", e)
        return EXIT_CODES["validation"]

    try:
        configure_logging(args.log_level)
    except ValueError as e:
        logging.basicConfig()
        logger.error("%s", e)
        return EXIT_CODES["validation"]

    try:
        cfg = resolve_config(args)
        if cfg.output_dir:
            set_output_dir(cfg.output_dir)
        result = dispatch(cfg, args)
    except Exception as e:
        result = error_result(e)

    shown = {k: v for k, v in result.items() if k not in ("rows", "checks")}
    print(json.dumps(to_jsonable(shown), indent=2, sort_keys=True))
    if result["status"] == "success":
        return 0
    logger.error("%s failed: %s", args.command, result["message"])
    return EXIT_CODES.get(result.get("error_kind"), 1)


def main() -> None:
    sys.exit(run())
