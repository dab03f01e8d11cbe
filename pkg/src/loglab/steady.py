"""Positive steady states of mu*theta'' + theta*(m - theta) = 0 with zero flux.

Newton's method runs in extended precision (``np.longdouble``): at moderate
and large diffusion rates the discrete residual of a double-precision iterate
cannot drop below ``mu * eps / h**2``, which is far above the convergence
tolerance used here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SingularOperatorError, SolverFailure, StepSizeError
from .grid import Grid, as_field, neumann_laplacian_apply, solve_helmholtz
from .resource import ResourceProfile, classify_conditions, positive_part

log = logging.getLogger(__name__)

__all__ = [
    "MU_MIN",
    "MU_LARGE",
    "NewtonOptions",
    "SteadyState",
    "BoundsCheck",
    "residual",
    "newton_solve",
    "parabolic_relax",
    "stable_dt",
    "continue_to",
    "solve_with_continuation",
    "check_bounds",
    "newton_tolerance",
    "initial_constant",
]

MU_MIN = 1e-6
MU_LARGE = 1e3
WORK_DTYPE = np.longdouble
TRIVIAL_RTOL = 1e-8


@dataclass(frozen=True)
class NewtonOptions:
    max_iters: int = 50
    tol: Optional[float] = None  # default: newton_tolerance(m)
    min_step: float = 2.0**-30
    ratio: float = 0.5  # continuation step ratio in mu (>= 0.5)
    max_halvings: int = 12  # continuation step refinements on failure


@dataclass(frozen=True)
class BoundsCheck:
    """Verdict for min m^+ < theta < max m with the two margins."""

    status: str  # "pass" | "fail" | "not-applicable"
    lower: float  # min theta - min m^+
    upper: float  # max m - max theta
    worst_node: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.status == "pass"


@dataclass
class SteadyState:
    mu: float
    theta: np.ndarray
    residual_norm: float
    newton_iters: int
    bounds: BoundsCheck
    tol: float
    at_noise_floor: bool = False
    warnings: list = field(default_factory=list)

    @property
    def M(self) -> float:
        return float(np.max(self.theta))

    @property
    def S(self) -> float:
        return float(np.min(self.theta))

    @property
    def bounds_ok(self) -> bool:
        return self.bounds.ok


def newton_tolerance(m) -> float:
    return 1e-11 * (1.0 + float(np.max(np.abs(m)))) ** 2


def _noise_floor(grid: Grid, mu, m, theta) -> float:
    eps = float(np.finfo(theta.dtype).eps)
    tmax = float(np.max(np.abs(theta)))
    return 8 * eps * (4 * mu / grid.h**2 + float(np.max(np.abs(m))) + 2 * tmax) * tmax


def residual(grid: Grid, mu, m, theta) -> np.ndarray:
    theta = as_field(grid, theta)
    m = as_field(grid, m, theta.dtype)
    return mu * neumann_laplacian_apply(grid, theta) + theta * (m - theta)


def _bounds_from_nodes(m, theta) -> BoundsCheck:
    lo = float(np.min(positive_part(m)))
    hi = float(np.max(m))
    if hi - lo <= 1e-12 * (1.0 + abs(hi)) or float(np.max(m) - np.min(m)) <= 1e-12 * (1.0 + abs(hi)):
        return BoundsCheck("not-applicable", float(np.min(theta)) - lo, hi - float(np.max(theta)))
    return _bounds_verdict(lo, hi, theta)


def _bounds_verdict(lo, hi, theta) -> BoundsCheck:
    t = np.asarray(theta, dtype=float)
    lower = float(t.min()) - lo
    upper = hi - float(t.max())
    bad = np.flatnonzero((t <= lo) | (t >= hi))
    status = "pass" if bad.size == 0 else "fail"
    return BoundsCheck(status, lower, upper, int(bad[0]) if bad.size else None)


def newton_solve(grid: Grid, mu, m, theta0, opts: NewtonOptions = NewtonOptions()) -> SteadyState:
    """Damped Newton for the positive steady state at diffusion rate ``mu``.

    The step is halved until the residual sup-norm decreases and every node
    stays positive.  Iteration stops when the residual reaches the tolerance,
    or when no step can reduce it further while it already sits at the
    rounding floor of the residual evaluation.

    Plain Newton is attracted to the trivial root from guesses below about
    m/2.  If it fails or collapses there, the solve restarts from ``theta0``
    with pseudo-transient continuation, which follows the (stable) time
    dynamics, and then polishes with Newton.
    """
    mu = max(float(mu), MU_MIN)
    theta = as_field(grid, theta0, WORK_DTYPE).copy()
    if np.any(theta <= 0):
        raise ValueError("Newton initial guess must be positive at every node")
    m = as_field(grid, m, WORK_DTYPE)
    tol = opts.tol if opts.tol is not None else newton_tolerance(m)
    try:
        return _newton(grid, mu, m, theta, tol, opts, 0)
    except SolverFailure as exc:
        first = exc
    try:
        theta, used = _pseudo_transient(grid, mu, m, theta, tol, opts)
    except (SolverFailure, SingularOperatorError):
        raise first
    log.debug("mu=%g: plain Newton failed (%s); pseudo-transient start used %d steps", mu, first, used)
    return _newton(grid, mu, m, theta, tol, opts, used)


def _newton(grid: Grid, mu, m, theta, tol, opts: NewtonOptions, iters: int) -> SteadyState:
    F = residual(grid, mu, m, theta)
    r = float(np.max(np.abs(F)))
    floor_hit = False
    while r > tol:
        if iters >= opts.max_iters:
            raise SolverFailure(
                f"Newton did not converge at mu={mu:g} after {iters} iterations "
                f"(residual {r:.3e} > {tol:.3e})", residual=r, mu=mu,
            )
        try:
            delta = solve_helmholtz(grid, mu, m - 2 * theta, -F)
        except SingularOperatorError as exc:
            raise SingularOperatorError(
                f"Newton Jacobian singular at mu={mu:g}: {exc}", exc.pivot, exc.index
            ) from exc
        iters += 1
        step = 1.0
        while True:
            trial = theta + step * delta
            if np.all(trial > 0):
                Ft = residual(grid, mu, m, trial)
                rt = float(np.max(np.abs(Ft)))
                if rt < r:
                    break
            step *= 0.5
            if step < opts.min_step:
                trial = None
                break
        if trial is None:
            if r <= _noise_floor(grid, mu, m, theta):
                floor_hit = True
                break
            raise SolverFailure(
                f"Newton line search stalled at mu={mu:g} (residual {r:.3e})", residual=r, mu=mu
            )
        theta, F, r = trial, Ft, rt
        log.debug("newton mu=%g iter=%d step=%g residual=%.3e", mu, iters, step, r)

    if not np.all(theta > 0):
        raise SolverFailure(f"Newton produced a non-positive state at mu={mu:g}", r, mu)
    # at this residual level a state this small cannot be told apart from theta = 0
    if float(np.max(theta)) <= TRIVIAL_RTOL * (1.0 + float(np.max(np.abs(m)))):
        raise SolverFailure(
            f"Newton collapsed onto the trivial solution at mu={mu:g} "
            f"(max theta {float(np.max(theta)):.3e})", r, mu,
        )
    return SteadyState(
        mu=mu, theta=theta, residual_norm=r, newton_iters=iters,
        bounds=_bounds_from_nodes(np.asarray(m, dtype=float), theta),
        tol=tol, at_noise_floor=floor_hit,
    )


def _pseudo_transient(grid: Grid, mu, m, theta, tol, opts: NewtonOptions):
    """Shifted Newton steps ``(J - I/tau) d = -F`` with tau grown by residual ratio.

    Small tau is a linearised implicit Euler step of the parabolic flow, so
    iterates cannot be pulled onto the unstable trivial branch.  Returns once
    tau is large enough that plain Newton takes over, or the residual is
    within a few orders of the tolerance.
    """
    tau0 = tau = 0.5 / max(float(np.max(m)), 1e-3)
    F = residual(grid, mu, m, theta)
    r = float(np.max(np.abs(F)))
    for k in range(1, opts.max_iters + 1):
        delta = solve_helmholtz(grid, mu, m - 2 * theta - 1 / tau, -F)
        trial = theta + delta
        if not np.all(trial > 0):
            tau *= 0.5
            continue
        Ft = residual(grid, mu, m, trial)
        rt = float(np.max(np.abs(Ft)))
        # the residual grows while the state rises off the trivial branch; keep tau >= tau0 then
        tau = min(max(tau * r / rt, tau0), 1e12) if rt > 0 else 1e12
        theta, F, r = trial, Ft, rt
        if tau >= 1e6 or r <= 1e3 * tol:
            return theta, k
    raise SolverFailure(f"pseudo-transient start stalled at mu={mu:g} (residual {r:.3e})", r, mu)


def stable_dt(m, safety: float = 0.9) -> float:
    """Largest time step for which the semi-implicit scheme keeps positivity.

    Each step matrix ``I - dt*mu*L - dt*diag(m - u)`` is an M-matrix as long
    as ``dt * (m - u) < 1`` at every node, and ``m - u < max m^+`` for u > 0.
    """
    top = float(np.max(positive_part(np.asarray(m, dtype=float))))
    return safety / top if top > 0 else 1.0


def parabolic_relax(grid: Grid, mu, m, u0, t_end, dt, stop_rate: float = 1e-12,
                    stall_window: int = 100) -> np.ndarray:
    """Relax u_t = mu*u'' + u*(m - u) toward steady state.

    Each step solves ``(I - dt*mu*L - dt*diag(m - u_k)) u_{k+1} = u_k``.
    Returns at ``t_end`` or as soon as ``|u_{k+1} - u_k|_inf / dt < stop_rate``.
    At large ``mu`` the rate bottoms out at a rounding floor above
    ``stop_rate``; once it is below 1e-8 and has not halved over
    ``stall_window`` steps the state is returned as converged.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    mu = max(float(mu), MU_MIN)
    m = as_field(grid, m, float)
    u = as_field(grid, u0, float).copy()
    if np.any(u < 0) or not np.any(u > 0):
        raise ValueError("initial density must be non-negative and not identically zero")
    steps = max(1, math.ceil(t_end / dt))
    inv = 1.0 / dt
    # the rate of change at u0 is its residual; an exact fixed point is returned as is
    if float(np.max(np.abs(residual(grid, mu, m, u)))) < stop_rate:
        return u
    best, best_at = math.inf, 0
    for k in range(steps):
        new = solve_helmholtz(grid, mu, m - u - inv, -inv * u)
        if np.any(new <= 0):
            raise StepSizeError(
                f"positivity lost at step {k} (dt={dt:g}); use dt below {stable_dt(m):.4g}"
            )
        rate = float(np.max(np.abs(new - u))) * inv
        u = new
        if rate < stop_rate:
            log.debug("parabolic relax stopped after %d steps (rate %.2e)", k + 1, rate)
            break
        if rate < 0.5 * best:
            best, best_at = rate, k
        elif rate < 1e-8 and k - best_at >= stall_window:
            log.debug("parabolic relax at rounding floor after %d steps (rate %.2e)", k + 1, rate)
            break
    return u


def continue_to(grid: Grid, state: SteadyState, mu_target, m,
                opts: NewtonOptions = NewtonOptions()) -> SteadyState:
    """Walk from ``state.mu`` to ``mu_target`` in geometric steps, halving on failure."""
    mu_target = max(float(mu_target), MU_MIN)
    ratio = min(max(opts.ratio, 0.5), 0.999)
    up = mu_target > state.mu
    current = state
    halvings = 0
    while current.mu != mu_target:
        factor = 1.0 / ratio if up else ratio
        nxt = current.mu * factor
        if (up and nxt >= mu_target) or (not up and nxt <= mu_target):
            nxt = mu_target
        try:
            current = newton_solve(grid, nxt, m, current.theta, opts)
            halvings = 0
            ratio = min(max(opts.ratio, 0.5), 0.999)
        except (SolverFailure, SingularOperatorError) as exc:
            halvings += 1
            if halvings > opts.max_halvings:
                raise SolverFailure(
                    f"continuation failed at mu={nxt:g}: {exc}",
                    residual=getattr(exc, "residual", None), mu=nxt,
                ) from exc
            ratio = math.sqrt(ratio)
            log.info("continuation step to mu=%g failed; step ratio -> %.4f", nxt, ratio)
    return current


def initial_constant(m) -> float:
    m = np.asarray(m, dtype=float)
    mean = float(np.mean(0.5 * (m[1:] + m[:-1])))
    return max(mean, 1e-3 * float(np.max(m)))


def solve_with_continuation(grid: Grid, mu_target, profile: ResourceProfile,
                            opts: NewtonOptions = NewtonOptions()) -> SteadyState:
    """Steady state at ``mu_target`` by continuation downward from large diffusion."""
    mu_target = max(float(mu_target), MU_MIN)
    m = grid.sample(profile)
    notes = []
    report = classify_conditions(profile)
    if not report.m0:
        notes.append("resource violates (M0); positive steady state not guaranteed")
        log.info("%s: %s", profile.describe(), notes[-1])
    mu_start = max(mu_target, MU_LARGE)
    if not float(np.max(m)) > 0:
        raise SolverFailure(f"{profile.describe()} has no positive part; only theta = 0 solves",
                            mu=mu_target)
    guess = np.full(grid.n, initial_constant(m))
    try:
        state = newton_solve(grid, mu_start, m, guess, opts)
    except (SolverFailure, SingularOperatorError) as exc:
        raise SolverFailure(f"start solve failed at mu={mu_start:g}: {exc}", mu=mu_start) from exc
    state = continue_to(grid, state, mu_target, m, opts)
    state.warnings.extend(notes)
    return state


def check_bounds(state: SteadyState, profile: ResourceProfile, samples: int = 8193) -> BoundsCheck:
    xs = np.linspace(0.0, 1.0, samples)
    vals = profile(xs)
    lo = float(np.min(positive_part(vals)))
    hi = float(np.max(vals))
    if hi - float(np.min(vals)) <= 1e-12 * (1.0 + abs(hi)):
        return BoundsCheck("not-applicable", state.S - lo, hi - state.M)
    return _bounds_verdict(lo, hi, state.theta)
