"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances are pinned below.  Run with ``pytest tests/test_acceptance.py -v``.
"""

import math
from functools import lru_cache

import numpy as np
import pytest

from loglab import (
    Grid, ResourceProfile, classify_conditions, compute_asymptotics, convergence_order,
    derivative, fd_sensitivity_check, moment_derivative_check, monotonicity_verdict,
    parabolic_relax, run_sweep, sandwich_check, solve_helmholtz, solve_neumann_poisson_zero_mean,
    solve_sensitivity, solve_with_continuation,
)
from loglab.steady import newton_tolerance, stable_dt
from loglab.sweep import log_spaced

N = 1025
MU12 = log_spaced(1e-2, 1e2, 12)
MU40 = log_spaced(1e-2, 1e2, 40)

ORACLE_TOL = 1e-8
MONOTONE_SLACK = 1e-8
STRICT_RTOL = 1e-9
IDENTITY_RTOL = 1e-6
MOMENT_RTOL = 1e-3
H_MU = 1e-3
C_ABS_TOL = 1e-4
C_FORMS_TOL = 1e-8
SLOPE_WINDOW = (1.8, 2.2)
MIN_POSITIVE_TOL = 1e-3
REFINE_RATIO = 3.5
MARGIN_DRIFT = 0.1
GRIDS = (513, 1025, 2049)

SUITE = {
    "constant": ResourceProfile.constant(1.0),
    "linear x": ResourceProfile.linear(0.0, 1.0),
    "x-0.25": ResourceProfile.shifted_ramp(0.25),
    "1.5+0.4sin(2pi x)": ResourceProfile.sine_offset(1.5, 0.4),
    "1+cos(pi x)": ResourceProfile.cosine_offset(1.0, 1.0),
    "sin(pi x)": ResourceProfile.single_peak(),
}
NONCONSTANT = {k: v for k, v in SUITE.items() if k != "constant"}


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


@lru_cache(maxsize=None)
def grid_of(n=N):
    return Grid(n)


@lru_cache(maxsize=None)
def steady(name, mu, n=N):
    return solve_with_continuation(grid_of(n), mu, SUITE.get(name) or EXTRA[name])


@lru_cache(maxsize=None)
def sens(name, mu, n=N):
    p = SUITE.get(name) or EXTRA[name]
    return solve_sensitivity(grid_of(n), steady(name, mu, n), grid_of(n).sample(p))


@lru_cache(maxsize=None)
def sweep(name, n=N, mus=tuple(MU40)):
    return run_sweep(grid_of(n), SUITE.get(name) or EXTRA[name], list(mus))


EXTRA = {
    "1-x": ResourceProfile.linear(1.0, -1.0),
    "0.5+sin(pi x)": ResourceProfile.single_peak(0.5, 1.0),
    "1.5+0.4cos(pi x)": ResourceProfile.cosine_offset(1.5, 0.4),
    "2+sin(pi x)": ResourceProfile.single_peak(2.0, 1.0),
    "1+3cos(pi x)": ResourceProfile.cosine_offset(1.0, 3.0),
}


def test_criterion_01_solver_fidelity(report):
    g = grid_of()
    worst_res, worst_gap, bad = 0.0, 0.0, []
    for name, p in SUITE.items():
        m = g.sample(p)
        tol = newton_tolerance(m)
        for mu in MU12:
            s = steady(name, mu)
            u = parabolic_relax(g, mu, m, np.full(g.n, float(np.mean(m)) if m.mean() > 0 else 0.5),
                                t_end=1e4, dt=stable_dt(m))
            gap = float(np.max(np.abs(u - np.asarray(s.theta, dtype=float))))
            worst_res = max(worst_res, s.residual_norm / tol)
            worst_gap = max(worst_gap, gap)
            if s.residual_norm > tol or gap > ORACLE_TOL:
                bad.append((name, mu, s.residual_norm, gap))
    ok = report(1, not bad, f"72 solves, max residual/tol {worst_res:.2e}, "
                            f"max |newton - parabolic| {worst_gap:.2e} (tol {ORACLE_TOL:g})")
    assert ok, bad


def test_criterion_02_bounds(report):
    violations = []
    margin = math.inf
    for name, p in NONCONSTANT.items():
        vals = p(np.linspace(0, 1, 8193))
        lo, hi = float(np.max([np.min(np.maximum(vals, 0)), 0])), float(np.max(vals))
        for mu in MU12:
            t = np.asarray(steady(name, mu).theta, dtype=float)
            bad = np.flatnonzero((t <= lo) | (t >= hi))
            margin = min(margin, float(t.min() - lo), float(hi - t.max()))
            violations += [(name, mu, int(i)) for i in bad]
    ok = report(2, not violations, f"{len(violations)} node violations, smallest margin {margin:.3e}")
    assert ok, violations[:5]


def test_criterion_03_max_falls_min_rises(report):
    p = SUITE["1.5+0.4sin(2pi x)"]
    assert classify_conditions(p).m1
    t = sweep("1.5+0.4sin(2pi x)")
    vm = monotonicity_verdict(t, "M", "decreasing", MONOTONE_SLACK)
    vs = monotonicity_verdict(t, "S", "increasing", MONOTONE_SLACK)
    ok = report(3, vm.ok and vs.ok,
                f"M decreasing {vm.status} (min step {vm.min_margin:.2e}), "
                f"S increasing {vs.status} (min step {vs.min_margin:.2e}) over 40 mu")
    assert ok


def _slope_sign_ok(name, sign):
    rows = sweep(name).rows
    scale = max(r.M for r in rows)
    if sign > 0:
        return all(r.slope_min > 0 for r in rows), min(r.slope_min for r in rows) / scale
    return all(r.slope_max < 0 for r in rows), max(r.slope_max for r in rows) / scale


def test_criterion_04_monotone_resource(report):
    results = {}
    for name in ("linear x", "x-0.25"):
        slope_ok, slope = _slope_sign_ok(name, +1)
        end_ok = all(r.theta_mu_last < 0 for r in sweep(name).rows)
        v = monotonicity_verdict(sweep(name), "M", "decreasing", MONOTONE_SLACK)
        results[name] = (slope_ok and end_ok and v.ok, slope)
    slope_ok, slope = _slope_sign_ok("1-x", -1)
    v = monotonicity_verdict(sweep("1-x"), "M", "decreasing", MONOTONE_SLACK)
    results["1-x"] = (slope_ok and v.ok, slope)
    ok = report(4, all(r[0] for r in results.values()),
                "theta' single-signed, theta_mu(1) < 0 for x and x-0.25, M decreasing: "
                + ", ".join(f"{k}={'ok' if r[0] else 'bad'}" for k, r in results.items()))
    assert ok


def test_criterion_04_mirrored_left_end_sign_as_stated(report):
    # The stated clause: theta_mu(0) > 0 for m = 1 - x.  Reflecting x -> 1 - x maps
    # this onto theta_mu(1) for m = x, which the same criterion requires to be < 0.
    first = [r.theta_mu_first for r in sweep("1-x").rows]
    mirror = [r.theta_mu_last for r in sweep("linear x").rows]
    ok = report("4 (theta_mu(0) > 0 for 1-x)", all(v > 0 for v in first),
                f"theta_mu(0) ranges over [{min(first):.3e}, {max(first):.3e}]; "
                f"mirror theta_mu(1) for m = x differs by {max(abs(a - b) for a, b in zip(first, mirror)):.1e}")
    assert ok


def test_criterion_05_single_peak(report):
    parts = []
    for name in ("sin(pi x)", "0.5+sin(pi x)"):
        rows = sweep(name).rows
        turns = max(r.slope_sign_changes for r in rows)
        interior = all(r.interior_argmax for r in rows)
        unique = all(int(np.sum(r.theta == r.theta.max())) == 1 for r in rows)
        at_max = max(r.theta_mu_at_argmax for r in rows)
        v = monotonicity_verdict(sweep(name), "M", "decreasing", MONOTONE_SLACK)
        parts.append((name, turns <= 1 and interior and unique and at_max < 0 and v.ok, turns, at_max, v.status))
    ok = report(5, all(p[1] for p in parts), "; ".join(
        f"{n}: max sign changes {t}, max theta_mu(argmax) {a:.2e}, M {s}" for n, _, t, a, s in parts))
    assert ok


def test_criterion_06_sandwich(report):
    profiles = [k for k, p in {**NONCONSTANT, **EXTRA}.items()
                if classify_conditions(p).m0 and classify_conditions(p).m1]
    fails, worst = [], math.inf
    for name in profiles:
        for mu in MU12:
            s, d = steady(name, mu), sens(name, mu)
            check = sandwich_check(s, d, m1=True)
            worst = min(worst, check.lower_margin, check.upper_margin)
            if not check.ok:
                fails.append((name, mu, check))
    ok = report(6, not fails and len(profiles) >= 3,
                f"(M1) profiles {profiles}, smallest margin {worst:.3e}, "
                f"slack {STRICT_RTOL:g}*|theta|")
    assert ok, fails[:3]


def test_criterion_07_identity(report):
    worst = 0.0
    for name in NONCONSTANT:
        for mu in MU12:
            worst = max(worst, sens(name, mu).identity_defect)
    ok = report(7, worst <= IDENTITY_RTOL, f"max relative defect {worst:.2e} (tol {IDENTITY_RTOL:g})")
    assert ok


def test_criterion_08_cubic_mass(report):
    verdicts = {n: monotonicity_verdict(sweep(n), "mass_p3", "decreasing", MONOTONE_SLACK)
                for n in NONCONSTANT}
    gaps = {}
    for name, p in NONCONSTANT.items():
        for mu in (0.1, 1.0):
            lhs, rhs = moment_derivative_check(grid_of(), p, mu, H_MU)
            gaps[(name, mu)] = abs(lhs - rhs) / abs(rhs)
    worst = max(gaps.values())
    ok = report(8, all(v.ok for v in verdicts.values()) and worst <= MOMENT_RTOL,
                f"mass_p3 decreasing in {sum(v.ok for v in verdicts.values())}/{len(verdicts)} sweeps, "
                f"max relative FD gap {worst:.2e} (tol {MOMENT_RTOL:g})")
    assert ok


def test_criterion_09_expansion(report):
    p = SUITE["1+cos(pi x)"]
    d = compute_asymptotics(grid_of(), p)
    slope = convergence_order(grid_of(), p, 1e-2, 4)
    c_err = abs(d.c_of_m - 1 / (2 * math.pi**2))
    forms = abs(d.c_of_m - d.c_cross_check)
    ok = report(9, c_err <= C_ABS_TOL and forms <= C_FORMS_TOL and SLOPE_WINDOW[0] <= slope <= SLOPE_WINDOW[1],
                f"C(m) = {d.c_of_m:.10f} (|err| {c_err:.1e}), forms differ by {forms:.1e}, "
                f"remainder slope {slope:.4f}")
    assert ok


def test_criterion_10_minimum_can_fall(report):
    name = "1+3cos(pi x)"
    d = compute_asymptotics(grid_of(), EXTRA[name])
    close = abs(d.min_c_plus_rho - 3 / (2 * math.pi**2)) <= MIN_POSITIVE_TOL and d.min_c_plus_rho > 0
    neg = {mu: float(np.max(sens(name, mu).theta_mu)) for mu in (1e3, 1e4)}
    S = [steady(name, mu).S for mu in (1e3, 3e3, 1e4)]
    ok = report(10, close and all(v < 0 for v in neg.values()) and S[2] < S[1] < S[0],
                f"min(C+rho) = {d.min_c_plus_rho:.6f}, max theta_mu at 1e3/1e4 = "
                f"{neg[1e3]:.2e}/{neg[1e4]:.2e}, S(1e3,3e3,1e4) = {S[0]:.9f}, {S[1]:.9f}, {S[2]:.9f}")
    assert ok


def _mms_errors(n):
    g = Grid(n)
    c = np.cos(np.pi * g.x)
    helm = float(np.max(np.abs(solve_helmholtz(g, 1.0, -np.ones(n), -(1 + np.pi**2) * c) - c)))
    pois = float(np.max(np.abs(solve_neumann_poisson_zero_mean(g, c).rho - c / np.pi**2)))
    return helm, pois


def test_criterion_11_grid_convergence(report):
    errs = [_mms_errors(n) for n in GRIDS]
    ratios = [errs[i][k] / errs[i + 1][k] for i in range(2) for k in range(2)]
    margins = {}
    for name, col in (("1.5+0.4sin(2pi x)", "M"), ("1.5+0.4sin(2pi x)", "S"), ("sin(pi x)", "M")):
        direction = "increasing" if col == "S" else "decreasing"
        margins[(name, col)] = [monotonicity_verdict(sweep(name, n), col, direction, MONOTONE_SLACK)
                                for n in GRIDS]
    verdicts_ok = all(v.ok for vs in margins.values() for v in vs)
    drift = max(abs(vs[i].min_margin / vs[-1].min_margin - 1) for vs in margins.values() for i in range(2))
    ok = report(11, min(ratios) >= REFINE_RATIO and verdicts_ok and drift <= MARGIN_DRIFT,
                f"min refinement ratio {min(ratios):.3f}, monotone verdicts pass on n={GRIDS}: "
                f"{verdicts_ok}, max margin drift {drift:.2e}")
    assert ok


def test_criterion_12_sensitivity_fd(report):
    cases = [("1+cos(pi x)", 1.0), ("sin(pi x)", 0.5), ("1.5+0.4sin(2pi x)", 1.0), ("linear x", 0.2)]
    ratios = {}
    for name, mu in cases:
        p = SUITE[name]
        ratios[name] = fd_sensitivity_check(grid_of(), p, mu, 1e-3) / fd_sensitivity_check(grid_of(), p, mu, 5e-4)
    passing = sum(r >= REFINE_RATIO for r in ratios.values())
    ok = report(12, passing >= 3, ", ".join(f"{k}: {v:.3f}" for k, v in ratios.items()))
    assert ok
