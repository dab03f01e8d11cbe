"""Command-line front end: ``loglab {solve,sweep,verify,asymptotics,hunt}``.

Exit codes: 0 success / all verdicts pass, 1 a verdict failed, 2 solver
failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    ProfileFamily,
    compute_asymptotics,
    constant_family,
    convergence_order,
    cosine_family,
    cosine_family_threshold,
    hunt_positive_sensitivity,
    sampled_family,
)
from .config import RunConfig, _check_n, load_config
from .errors import ConfigError, MeanPositivityError, SingularOperatorError, SolverFailure, SweepError
from .grid import Grid, derivative
from .sensitivity import solve_sensitivity
from .steady import NewtonOptions, check_bounds, solve_with_continuation
from .sweep import run_sweep
from .verify import DEFAULT_MU, run_verification

log = logging.getLogger("loglab")

EXIT_OK, EXIT_VERDICT, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3
COMMANDS = ("solve", "sweep", "verify", "asymptotics", "hunt")

PLOT_SCRIPT = '''\
"""Plot a loglab sweep table: python {script} [{csv}]"""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
with open(path) as fh:
    rows = [r for r in csv.DictReader(fh) if r["M"] != "nan"]
mu = [float(r["mu"]) for r in rows]
fig, axes = plt.subplots(1, 3, figsize=(13, 4))
for col in ("M", "S"):
    axes[0].semilogx(mu, [float(r[col]) for r in rows], marker=".", label=col)
axes[0].set_xlabel("mu")
axes[0].legend()
axes[1].semilogx(mu, [float(r["gap"]) for r in rows], marker=".")
axes[1].set_title("gap = M - S")
for col in ("mass_p1", "mass_p3"):
    axes[2].semilogx(mu, [float(r[col]) for r in rows], marker=".", label=col)
axes[2].legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
'''


def _num(v):
    v = float(v)
    return None if math.isnan(v) or math.isinf(v) else v


def _dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _csv(header, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _newton_opts(cfg: RunConfig) -> NewtonOptions:
    return NewtonOptions(max_iters=cfg.max_iters, tol=cfg.tol)


def _require_profile(cfg: RunConfig):
    if cfg.profile is None:
        raise ConfigError("config needs a [resource] section for this command")
    return cfg.profile


def _write(out: Path, files: dict, command: str, argv) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    meta = {
        "command": command,
        "argv": list(argv),
        "version": __version__,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "files": sorted(files),
    }
    (out / f"{command}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_solve(cfg: RunConfig):
    profile = _require_profile(cfg)
    if cfg.mu_value is None:
        raise ConfigError("solve needs a single [mu] value")
    grid = Grid(cfg.n)
    m = grid.sample(profile)
    state = solve_with_continuation(grid, cfg.mu_value, profile, _newton_opts(cfg))
    sens = solve_sensitivity(grid, state, m)
    bounds = check_bounds(state, profile)
    theta = np.asarray(state.theta, dtype=float)
    files = {
        "theta.csv": _csv(
            ("x", "theta", "theta_prime", "theta_mu"),
            (grid.x, theta, np.asarray(derivative(grid, state.theta), dtype=float),
             np.asarray(sens.theta_mu, dtype=float)),
        ),
        "summary.json": _dump_json({
            "mu": state.mu, "M": state.M, "S": state.S,
            "residual": state.residual_norm, "tolerance": state.tol,
            "iters": state.newton_iters,
            "bounds": {"status": bounds.status, "lower_margin": bounds.lower,
                       "upper_margin": bounds.upper},
            "identity_defect": sens.identity_defect,
            "profile": profile.describe(), "n": cfg.n,
        }),
    }
    return EXIT_OK, files


def cmd_sweep(cfg: RunConfig):
    profile = _require_profile(cfg)
    mus = cfg.mu_values or DEFAULT_MU
    grid = Grid(cfg.n)
    moments = (cfg.moment_p,) if cfg.moment_p not in (1, 2, 3) else ()
    table = run_sweep(grid, profile, mus, _newton_opts(cfg), parallel=cfg.parallel, moments=moments)
    files = {"sweep.csv": table.to_csv(), "plot_sweep.py": PLOT_SCRIPT.format(script="plot_sweep.py", csv="sweep.csv")}
    if moments:
        p = moments[0]
        files[f"moments_p{p}.csv"] = _csv(
            ("mu", f"mass_p{p}"),
            ([r.mu for r in table.rows], [r.extra_moments.get(p, float("nan")) for r in table.rows]),
        )
    return EXIT_OK, files


def cmd_verify(cfg: RunConfig):
    profile = _require_profile(cfg)
    report = run_verification(
        profile, n=cfg.n, mu_values=cfg.mu_values or DEFAULT_MU, large_mu=cfg.large_mu,
        opts=_newton_opts(cfg), parallel=cfg.parallel, lambda0=cfg.lambda0, levels=cfg.levels,
        moment_p=cfg.moment_p,
    )
    code = EXIT_VERDICT if report.failed else EXIT_OK
    for name in report.failed:
        print(f"verdict failed: {name}", file=sys.stderr)
    return code, {"verify.json": _dump_json(report.as_dict())}


def cmd_asymptotics(cfg: RunConfig):
    profile = _require_profile(cfg)
    grid = Grid(cfg.n)
    data = compute_asymptotics(grid, profile)
    slope = convergence_order(grid, profile, cfg.lambda0, cfg.levels, _newton_opts(cfg))
    files = {
        "asymptotics.json": _dump_json({
            "m_bar": data.m_bar,
            "c_of_m": data.c_of_m,
            "c_of_m_cross_check": data.c_cross_check,
            "min_c_plus_rho": data.min_c_plus_rho,
            "remainder_slope": slope,
            "lambda0": cfg.lambda0, "levels": cfg.levels,
            "profile": profile.describe(), "n": cfg.n,
        }),
        "rho.csv": _csv(("x", "rho_m", "c_plus_rho"),
                        (grid.x, data.rho_m, data.first_order)),
    }
    return EXIT_OK, files


def _family(cfg: RunConfig) -> ProfileFamily:
    h = cfg.hunt
    if h.family == "cosine":
        return cosine_family(h.c, h.lo, h.hi)
    if h.family == "constant":
        return constant_family(h.lo, h.hi)
    xs, phi, dphi = zip(*h.samples)
    return sampled_family(xs, phi, dphi, h.c, h.lo, h.hi)


def cmd_hunt(cfg: RunConfig):
    h = cfg.hunt
    family = _family(cfg)
    found = hunt_positive_sensitivity(family, budget=h.budget, n=cfg.n)
    result = {"family": family.name, "range": [h.lo, h.hi], "budget": h.budget,
              "deterministic": True, "found": found is not None}
    if h.family == "cosine":
        result["closed_form_threshold"] = cosine_family_threshold(h.c)
    if found is not None:
        data = compute_asymptotics(Grid(cfg.n), found)
        result["profile"] = found.describe()
        result["params"] = found.param_dict if found.kind != "sampled" else None
        if found.kind == "sampled":
            result["samples"] = [list(t) for t in zip(found.nodes, found.values, found.slopes)]
        result["min_c_plus_rho"] = data.min_c_plus_rho
        result["c_of_m"] = data.c_of_m
    return EXIT_OK, {"hunt.json": _dump_json(result)}


HANDLERS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "asymptotics": cmd_asymptotics,
    "hunt": cmd_hunt,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loglab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"loglab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "hunt", help="TOML run configuration")
        p.add_argument("--out", help="output directory (overrides [output] dir)")
        p.add_argument("--parallel", action="store_true", help="solve sweep rows independently")
        p.add_argument("--n", type=int, help="grid node count (odd, >= 65)")
        p.add_argument("--seedless", action="store_true",
                       help="no-op: every command, hunt included, is deterministic")
    return parser


def _setup_logging():
    level = os.environ.get("LOGLAB_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("loglab")
    root.handlers[:] = [handler]
    root.setLevel(levels.get(level, logging.ERROR))
    root.propagate = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        overrides = {}
        if args.n is not None:
            overrides["n"] = _check_n(args.n)
        if args.parallel:
            overrides["parallel"] = True
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        out = Path(args.out or cfg.out_dir or ".")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, files = HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailure, SingularOperatorError, SweepError, MeanPositivityError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write(out, files, args.command, argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
