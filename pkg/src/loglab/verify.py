"""Run every applicable monotonicity / identity check for one resource profile."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .asymptotics import compute_asymptotics, convergence_order
from .errors import MeanPositivityError, SweepError
from .grid import Grid
from .resource import ConditionReport, ResourceProfile, classify_conditions
from .sensitivity import STRICT_RTOL
from .steady import NewtonOptions
from .sweep import SweepTable, log_spaced, monotonicity_verdict, run_sweep

__all__ = ["STATEMENTS", "Verdict", "VerifyReport", "run_verification", "DEFAULT_MU", "LARGE_MU"]

STATEMENTS = (
    "thm-1.2-M",
    "thm-1.2-S",
    "thm-1.3",
    "thm-1.4",
    "lem-2.1-bounds",
    "lem-2.2-sandwich",
    "eq-3.4-identity",
    "lem-4.1-p3",
    "lem-2.3-order",
    "heni-min-decreasing",
)
DEFAULT_MU = tuple(log_spaced(1e-2, 1e2, 40))
LARGE_MU = (1e3, 3e3, 1e4)
IDENTITY_RTOL = 1e-6
ORDER_WINDOW = (1.8, 2.2)


@dataclass
class Verdict:
    statement: str
    status: str  # "pass" | "fail" | "not-applicable" | "inconclusive"
    tolerance: dict
    witnesses: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"status": self.status, "tolerance": self.tolerance,
                "witnesses": self.witnesses, "detail": self.detail}


@dataclass
class VerifyReport:
    profile: ResourceProfile
    n: int
    conditions: ConditionReport
    verdicts: dict
    exploratory: dict = field(default_factory=dict)

    @property
    def failed(self) -> list:
        return [k for k, v in self.verdicts.items() if v.status == "fail"]

    def as_dict(self) -> dict:
        return {
            "profile": self.profile.describe(),
            "n": self.n,
            "conditions": self.conditions.as_dict(),
            "verdicts": {k: self.verdicts[k].as_dict() for k in STATEMENTS},
            "exploratory": self.exploratory,
        }


def _na(statement, tol, why) -> Verdict:
    return Verdict(statement, "not-applicable", tol, detail={"reason": why})


def _from_monotone(statement, table, column, direction) -> Verdict:
    v = monotonicity_verdict(table, column, direction)
    status = {"pass": "pass", "fail": "fail", "inconclusive": "inconclusive",
              "degenerate": "fail"}[v.status]
    return Verdict(statement, status, {"monotone_slack": v.slack},
                   [v.witness] if v.witness else [], {"min_margin": v.min_margin})


def _combine(statement, tol, parts, detail=None) -> Verdict:
    """AND together (status, witness) parts; fail dominates inconclusive."""
    statuses = [s for s, _ in parts]
    witnesses = [w for s, w in parts if s != "pass" and w is not None]
    if "fail" in statuses:
        status = "fail"
    elif "inconclusive" in statuses:
        status = "inconclusive"
    else:
        status = "pass"
    return Verdict(statement, status, tol, witnesses, detail or {})


def _strict(value: float, sign: int, slack: float) -> str:
    """'pass' if sign*value > 0, 'inconclusive' within slack of zero, else 'fail'."""
    v = sign * value
    if v > 0:
        return "pass"
    return "inconclusive" if v > -slack else "fail"


def _rows_check(table: SweepTable, predicate) -> list:
    out = []
    for r in table.rows:
        if not r.ok:
            out.append(("inconclusive", {"mu": r.mu, "failed": r.failed}))
            continue
        status, info = predicate(r)
        out.append((status, None if status == "pass" else {"mu": r.mu, **info}))
    return out


def run_verification(profile: ResourceProfile, n: int = 1025,
                     mu_values: Sequence[float] = DEFAULT_MU,
                     large_mu: Sequence[float] = LARGE_MU,
                     opts: NewtonOptions = NewtonOptions(), parallel: bool = False,
                     lambda0: float = 1e-2, levels: int = 4,
                     moment_p: Optional[int] = None) -> VerifyReport:
    grid = Grid(n)
    cond = classify_conditions(profile)
    verdicts = {}
    exploratory = {}
    no_m0 = "resource violates (M0)"

    if not cond.m0:
        for s in STATEMENTS:
            verdicts[s] = _na(s, {}, no_m0)
        return VerifyReport(profile, n, cond, verdicts, exploratory)

    moments = (moment_p,) if moment_p and moment_p not in (1, 2, 3) else ()
    try:
        table = run_sweep(grid, profile, mu_values, opts, parallel=parallel, moments=moments)
    except SweepError as exc:
        for s in STATEMENTS:
            verdicts[s] = Verdict(s, "inconclusive", {}, detail={"reason": str(exc)})
        return VerifyReport(profile, n, cond, verdicts, exploratory)

    strict_tol = {"strict_rtol": STRICT_RTOL}

    verdicts["lem-2.1-bounds"] = _combine(
        "lem-2.1-bounds", {"strict": 0.0},
        _rows_check(table, lambda r: ("pass" if r.bounds_status == "pass" else "fail",
                                      {"bounds": r.bounds_status})),
    )

    if cond.m1:
        verdicts["thm-1.2-M"] = _from_monotone("thm-1.2-M", table, "M", "decreasing")
        verdicts["thm-1.2-S"] = _from_monotone("thm-1.2-S", table, "S", "increasing")
        verdicts["lem-2.2-sandwich"] = _combine(
            "lem-2.2-sandwich", strict_tol,
            _rows_check(table, lambda r: ("pass" if r.sandwich_status == "pass" else "fail",
                                          {"lower": r.sandwich_lower, "upper": r.sandwich_upper})),
        )
    else:
        for s in ("thm-1.2-M", "thm-1.2-S", "lem-2.2-sandwich"):
            verdicts[s] = _na(s, strict_tol, "resource violates (M1)")

    if cond.m2:
        sign = 1 if cond.m2_direction == "non-decreasing" else -1

        # theta is monotone, so its maximum sits at the end where m^+ is largest and
        # theta_mu is negative there: x = 1 when m^+ increases, x = 0 (by the
        # reflection x -> 1 - x) when it decreases.
        def mono_row(r):
            slack = STRICT_RTOL * r.M
            slope = r.slope_min if sign > 0 else r.slope_max
            end = r.theta_mu_last if sign > 0 else r.theta_mu_first
            parts = [_strict(slope, sign, slack), _strict(end, -1, 0.0)]
            status = "fail" if "fail" in parts else ("inconclusive" if "inconclusive" in parts else "pass")
            return status, {"slope_extreme": slope, "theta_mu_end": end}

        m_dec = _from_monotone("thm-1.3", table, "M", "decreasing")
        verdicts["thm-1.3"] = _combine(
            "thm-1.3", {**strict_tol, **m_dec.tolerance},
            _rows_check(table, mono_row) + [(m_dec.status, m_dec.witnesses[0] if m_dec.witnesses else None)],
            {"direction": cond.m2_direction},
        )
    else:
        verdicts["thm-1.3"] = _na("thm-1.3", strict_tol, "resource violates (M2)")

    if cond.m3:
        def peak_row(r):
            if r.slope_sign_changes > 1:
                return "fail", {"sign_changes": r.slope_sign_changes}
            return _strict(r.theta_mu_at_argmax, -1, 0.0), {"theta_mu_at_argmax": r.theta_mu_at_argmax}

        m_dec = _from_monotone("thm-1.4", table, "M", "decreasing")
        verdicts["thm-1.4"] = _combine(
            "thm-1.4", {"max_sign_changes": 1, **m_dec.tolerance},
            _rows_check(table, peak_row) + [(m_dec.status, m_dec.witnesses[0] if m_dec.witnesses else None)],
            {"peak": cond.peak},
        )
    else:
        verdicts["thm-1.4"] = _na("thm-1.4", {"max_sign_changes": 1}, "resource violates (M3)")

    verdicts["eq-3.4-identity"] = _combine(
        "eq-3.4-identity", {"identity_rtol": IDENTITY_RTOL},
        _rows_check(table, lambda r: ("pass" if r.identity_defect <= IDENTITY_RTOL else "fail",
                                      {"defect": r.identity_defect})),
        {"max_defect": float(max(r.identity_defect for r in table.valid_rows()))},
    )
    verdicts["lem-4.1-p3"] = _from_monotone("lem-4.1-p3", table, "mass_p3", "decreasing")

    order_tol = {"slope_window": list(ORDER_WINDOW), "lambda0": lambda0, "levels": levels}
    large_tol = {"monotone_rtol": 1e-8, "mu": list(large_mu)}
    try:
        asym = compute_asymptotics(grid, profile)
    except MeanPositivityError as exc:
        verdicts["lem-2.3-order"] = _na("lem-2.3-order", order_tol, str(exc))
        verdicts["heni-min-decreasing"] = _na("heni-min-decreasing", large_tol, str(exc))
    else:
        slope = convergence_order(grid, profile, lambda0, levels, opts)
        if math.isnan(slope):
            status = "inconclusive"
        else:
            status = "pass" if ORDER_WINDOW[0] <= slope <= ORDER_WINDOW[1] else "fail"
        verdicts["lem-2.3-order"] = Verdict(
            "lem-2.3-order", status, order_tol,
            [] if status == "pass" else [{"slope": None if math.isnan(slope) else slope}],
            {"slope": None if math.isnan(slope) else slope, "c_of_m": asym.c_of_m},
        )
        if asym.min_c_plus_rho > 0:
            big = run_sweep(grid, profile, large_mu, opts)
            s_dec = _from_monotone("heni-min-decreasing", big, "S", "decreasing")
            parts = _rows_check(big, lambda r: ("pass" if r.theta_mu_max < 0 else "fail",
                                                {"theta_mu_max": r.theta_mu_max}))
            parts.append((s_dec.status, s_dec.witnesses[0] if s_dec.witnesses else None))
            verdicts["heni-min-decreasing"] = _combine(
                "heni-min-decreasing", large_tol, parts,
                {"min_c_plus_rho": asym.min_c_plus_rho, "S": [r.S for r in big.rows]},
            )
        else:
            verdicts["heni-min-decreasing"] = _na(
                "heni-min-decreasing", large_tol,
                f"min(C(m)+rho_m) = {asym.min_c_plus_rho:.6g} is not positive",
            )

    # open questions: recorded, never judged
    exploratory["gap-decreasing"] = monotonicity_verdict(table, "gap", "decreasing").as_dict()
    exploratory["mass-p1-decreasing"] = monotonicity_verdict(table, "mass_p1", "decreasing").as_dict()
    if moments:
        p = moments[0]
        vals = [r.extra_moments.get(p, float("nan")) for r in table.valid_rows()]
        steps = [b - a for a, b in zip(vals, vals[1:])]
        exploratory[f"mass-p{p}-decreasing"] = {"all_steps_negative": all(s < 0 for s in steps),
                                                "max_step": max(steps) if steps else None}
    return VerifyReport(profile, n, cond, {k: verdicts[k] for k in STATEMENTS}, exploratory)
