"""Diffusion-rate sweeps: extrema, moments and monotonicity verdicts."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, SingularOperatorError, SolverFailure, SweepError
from .grid import Grid, derivative, gradient_energy, integrate
from .resource import ResourceProfile, classify_conditions
from .sensitivity import STRICT_RTOL, sandwich_check, solve_sensitivity
from .steady import (
    NewtonOptions,
    SteadyState,
    check_bounds,
    continue_to,
    initial_constant,
    newton_solve,
    parabolic_relax,
    solve_with_continuation,
    stable_dt,
)

log = logging.getLogger(__name__)

__all__ = [
    "CSV_COLUMNS",
    "SweepRow",
    "SweepTable",
    "MonotoneVerdict",
    "refine_extremum",
    "run_sweep",
    "monotonicity_verdict",
    "sign_changes",
    "log_spaced",
]

CSV_COLUMNS = (
    "mu", "M", "S", "gap", "argmax_x", "argmin_x", "mass_p1", "mass_p2", "mass_p3",
    "grad_sq", "theta_mu_at_argmax", "newton_iters", "residual",
)
MONOTONE_RTOL = 1e-8
NAN = float("nan")


def log_spaced(lo: float, hi: float, count: int) -> list[float]:
    return [float(v) for v in np.logspace(math.log10(lo), math.log10(hi), count)]


@dataclass
class SweepRow:
    mu: float
    M: float = NAN
    S: float = NAN
    gap: float = NAN
    argmax_x: float = NAN
    argmin_x: float = NAN
    mass_p1: float = NAN
    mass_p2: float = NAN
    mass_p3: float = NAN
    grad_sq: float = NAN
    theta_mu_at_argmax: float = NAN
    newton_iters: int = 0
    residual: float = NAN
    # diagnostics kept out of the CSV
    theta_mu_at_argmin: float = NAN
    theta_mu_first: float = NAN
    theta_mu_last: float = NAN
    theta_mu_max: float = NAN
    slope_min: float = NAN  # interior nodes of derivative(theta)
    slope_max: float = NAN
    slope_sign_changes: int = -1
    interior_argmax: bool = False
    identity_defect: float = NAN
    bounds_status: str = "n/a"
    sandwich_status: str = "n/a"
    sandwich_lower: float = NAN
    sandwich_upper: float = NAN
    tol: float = NAN
    extra_moments: dict = field(default_factory=dict)
    theta: Optional[np.ndarray] = field(default=None, repr=False)
    theta_mu: Optional[np.ndarray] = field(default=None, repr=False)
    failed: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failed is None


@dataclass
class SweepTable:
    profile: ResourceProfile
    n: int
    rows: list

    def column(self, name: str, valid_only: bool = True) -> np.ndarray:
        if name not in {f.name for f in fields(SweepRow)}:
            raise KeyError(f"unknown sweep column {name!r}")
        rows = [r for r in self.rows if r.ok] if valid_only else self.rows
        return np.array([getattr(r, name) for r in rows], dtype=float)

    @property
    def mu(self) -> np.ndarray:
        return self.column("mu")

    def valid_rows(self) -> list:
        return [r for r in self.rows if r.ok]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def refine_extremum(grid: Grid, u, kind: str = "max") -> tuple[float, float]:
    """Extremum value and location by a 3-point parabola around the best node.

    Falls back to the node itself at the two ends (where the zero-flux
    condition already makes the end node a critical point).
    """
    u = np.asarray(u, dtype=float)
    i = int(np.argmax(u) if kind == "max" else np.argmin(u))
    if i == 0 or i == len(u) - 1:
        return float(u[i]), float(grid.x[i])
    a, b, c = u[i - 1], u[i], u[i + 1]
    curv = a - 2 * b + c
    if curv == 0:
        return float(b), float(grid.x[i])
    offset = 0.5 * (a - c) / curv
    value = b - 0.25 * (a - c) * offset
    if kind == "max":
        value = max(value, b)
    else:
        value = min(value, b)
    return float(value), float(grid.x[i] + offset * grid.h)


def sign_changes(grid: Grid, u) -> int:
    """Sign changes of ``u`` over interior nodes, ignoring near-zero entries."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n,):
        raise ValueError("field does not match grid")
    cut = 1e-10 * float(np.max(np.abs(u))) if u.size else 0.0
    inner = u[1:-1]
    s = np.sign(inner[np.abs(inner) > cut])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _row_from_state(grid: Grid, profile: ResourceProfile, m, state: SteadyState,
                    m1: bool, moments: Sequence[int]) -> SweepRow:
    theta64 = np.asarray(state.theta, dtype=float)
    sens = solve_sensitivity(grid, state, m)
    tmu = np.asarray(sens.theta_mu, dtype=float)
    M, xM = refine_extremum(grid, theta64, "max")
    S, xS = refine_extremum(grid, theta64, "min")
    gap = M - S
    M = S + gap  # keeps M == S + gap exact in floating point
    imax, imin = int(np.argmax(theta64)), int(np.argmin(theta64))
    slope = np.asarray(derivative(grid, state.theta), dtype=float)[1:-1]
    sw = sandwich_check(state, sens, m1=m1)
    th = state.theta
    row = SweepRow(
        mu=state.mu, M=M, S=S, gap=gap, argmax_x=xM, argmin_x=xS,
        mass_p1=float(integrate(grid, th)),
        mass_p2=float(integrate(grid, th**2)),
        mass_p3=float(integrate(grid, th**3)),
        grad_sq=float(gradient_energy(grid, th)),
        theta_mu_at_argmax=float(tmu[imax]),
        newton_iters=state.newton_iters,
        residual=float(state.residual_norm),
        theta_mu_at_argmin=float(tmu[imin]),
        theta_mu_first=float(tmu[0]),
        theta_mu_last=float(tmu[-1]),
        theta_mu_max=float(tmu.max()),
        slope_min=float(slope.min()),
        slope_max=float(slope.max()),
        slope_sign_changes=sign_changes(grid, np.asarray(derivative(grid, state.theta), dtype=float)),
        interior_argmax=0 < imax < grid.n - 1,
        identity_defect=sens.identity_defect,
        bounds_status=check_bounds(state, profile).status,
        sandwich_status=sw.status,
        sandwich_lower=sw.lower_margin,
        sandwich_upper=sw.upper_margin,
        tol=state.tol,
        theta=theta64,
        theta_mu=tmu,
    )
    for p in moments:
        row.extra_moments[int(p)] = float(integrate(grid, th ** int(p)))
    return row


def _independent_state(grid: Grid, profile: ResourceProfile, mu: float,
                       opts: NewtonOptions) -> SteadyState:
    """Row solve without continuation: parabolic relaxation, then Newton."""
    m = grid.sample(profile)
    if not float(np.max(m)) > 0:
        return solve_with_continuation(grid, mu, profile, opts)  # raises: no positive part
    u0 = np.full(grid.n, initial_constant(m))
    try:
        start = parabolic_relax(grid, mu, m, u0, t_end=1e4, dt=stable_dt(m), stop_rate=1e-9)
        return newton_solve(grid, mu, m, start, opts)
    except (SolverFailure, SingularOperatorError) as exc:
        log.info("independent solve at mu=%g fell back to continuation: %s", mu, exc)
        return solve_with_continuation(grid, mu, profile, opts)


def _parallel_row(args):
    grid, profile, mu, opts, m1, moments = args
    m = grid.sample(profile)
    try:
        state = _independent_state(grid, profile, mu, opts)
        return _row_from_state(grid, profile, m, state, m1, moments)
    except (SolverFailure, SingularOperatorError) as exc:
        return SweepRow(mu=mu, failed=str(exc))


def run_sweep(grid: Grid, profile: ResourceProfile, mu_values: Sequence[float],
              opts: NewtonOptions = NewtonOptions(), parallel: bool = False,
              workers: Optional[int] = None, moments: Sequence[int] = ()) -> SweepTable:
    """Solve at each ``mu`` (ascending input) and tabulate the diagnostics.

    Continuation mode walks from the largest ``mu`` downward, reusing each
    state as the next initial guess.  Parallel mode solves rows
    independently.  Rows that fail keep a failure message instead of values.
    """
    mus = [float(v) for v in mu_values]
    if not mus:
        raise ValueError("mu_values must be non-empty")
    if any(v <= 0 for v in mus) or any(b <= a for a, b in zip(mus, mus[1:])):
        raise ValueError("mu_values must be positive and strictly increasing")
    m = grid.sample(profile)
    m1 = classify_conditions(profile).m1
    moments = tuple(int(p) for p in moments)

    if parallel:
        jobs = [(grid, profile, mu, opts, m1, moments) for mu in mus]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_parallel_row, jobs))
    else:
        by_mu = {}
        state = None
        for mu in reversed(mus):
            try:
                if state is None:
                    state = solve_with_continuation(grid, mu, profile, opts)
                else:
                    state = continue_to(grid, state, mu, m, opts)
                by_mu[mu] = _row_from_state(grid, profile, m, state, m1, moments)
            except (SolverFailure, SingularOperatorError) as exc:
                log.warning("sweep row mu=%g failed: %s", mu, exc)
                by_mu[mu] = SweepRow(mu=mu, failed=str(exc))
                state = None
        rows = [by_mu[mu] for mu in mus]
    if all(not r.ok for r in rows):
        raise SweepError(f"every sweep row failed for {profile.describe()}")
    return SweepTable(profile=profile, n=grid.n, rows=rows)


@dataclass(frozen=True)
class MonotoneVerdict:
    column: str
    direction: str
    ok: bool
    status: str  # "pass" | "fail" | "inconclusive" | "degenerate"
    slack: float
    min_margin: float  # smallest step in the asserted direction
    witness: Optional[dict] = None

    def as_dict(self) -> dict:
        return {
            "column": self.column, "direction": self.direction, "ok": self.ok,
            "status": self.status, "slack": self.slack, "min_margin": self.min_margin,
            "witness": self.witness,
        }


def monotonicity_verdict(table: SweepTable, column: str, direction: str,
                         slack: Optional[float] = None) -> MonotoneVerdict:
    """Strict monotonicity of ``column`` across consecutive valid rows.

    Steps against the asserted direction larger than ``slack`` are failures;
    smaller ones are inconclusive at this resolution.  A column whose steps
    are all within ``slack`` of zero is degenerate (not strict).
    """
    if direction not in ("increasing", "decreasing"):
        raise ValueError("direction must be 'increasing' or 'decreasing'")
    rows = table.valid_rows()
    if len(rows) < 2:
        raise InsufficientDataError(f"need at least 2 valid rows, have {len(rows)}")
    vals = np.array([getattr(r, column) for r in rows], dtype=float)
    mus = [r.mu for r in rows]
    if slack is None:
        slack = MONOTONE_RTOL * max(1.0, float(np.max(np.abs(vals))))
    steps = np.diff(vals) * (1.0 if direction == "increasing" else -1.0)

    def witness(k):
        return {"mu_pair": [mus[k], mus[k + 1]], "values": [float(vals[k]), float(vals[k + 1])],
                "magnitude": float(-steps[k])}

    margin = float(steps.min())
    if np.all(np.abs(steps) <= slack) and np.all(steps <= 0):
        return MonotoneVerdict(column, direction, False, "degenerate", slack, margin,
                               witness(int(np.argmin(steps))))
    bad = np.flatnonzero(steps <= 0)
    if bad.size == 0:
        return MonotoneVerdict(column, direction, True, "pass", slack, margin)
    hard = [k for k in bad if -steps[k] >= slack]
    if hard:
        return MonotoneVerdict(column, direction, False, "fail", slack, margin, witness(int(hard[0])))
    return MonotoneVerdict(column, direction, False, "inconclusive", slack, margin,
                           witness(int(bad[0])))
