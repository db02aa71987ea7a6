"""Solve a unit-commitment instance and turn the MILP solution into a schedule."""

from __future__ import annotations

import numpy as np

from ..uc import UCInstance, UCSchedule, check_feasibility, to_milp, uc_layout
from .bnb import INT_TOL, Limits, branch_and_bound
from .model import SolveResult

ON_THRESHOLD = 1e-6
# solver noise below this many MW is reported as exactly zero output
ZERO_SNAP = 1e-9


class ScheduleError(RuntimeError):
    """The rounded solver output does not satisfy the commitment model."""


def extract_schedule(inst: UCInstance, x: np.ndarray, objective: float, reduce_free_units: bool) -> UCSchedule:
    lay = uc_layout(inst, reduce_free_units)
    p = x[lay.p].copy()
    p[p < ZERO_SNAP] = 0.0
    G, T = p.shape
    on = np.zeros((G, T))
    su = np.zeros((G, T))
    modeled = lay.on[:, 0] >= 0
    if modeled.any():
        raw_on = x[lay.on[modeled]]
        raw_su = x[lay.startup[modeled]]
        if np.max(np.abs(raw_on - np.round(raw_on)), initial=0.0) > INT_TOL or np.max(
            np.abs(raw_su - np.round(raw_su)), initial=0.0
        ) > INT_TOL:
            raise ScheduleError("solver returned fractional commitment values")
        on[modeled] = np.round(raw_on)
        su[modeled] = np.round(raw_su)
    gens = inst.fleet.generators
    for g in np.flatnonzero(~modeled):
        # status of a free unit follows from its output
        on[g] = (p[g] > ON_THRESHOLD).astype(float)
        prev = np.concatenate([[1.0 if gens[g].initial_on else 0.0], on[g, :-1]])
        su[g] = np.maximum(on[g] - prev, 0.0)
    curt = np.zeros(T)
    if inst.options.allow_wind_curtailment:
        curt = np.maximum(x[lay.curtail], 0.0)
    return UCSchedule(p, on, su, float(objective), curt)


def solve_uc(
    inst: UCInstance,
    limits: Limits = Limits(),
    *,
    reduce_free_units: bool = True,
) -> tuple[SolveResult, UCSchedule | None]:
    """Commit and dispatch the fleet for one day.

    Returns the raw solver result and, when the solver produced an incumbent,
    the verified schedule. Units without start-up cost or minimum output are
    solved without commitment binaries by default; this does not change the
    optimum.
    """
    mip = to_milp(inst, reduce_free_units=reduce_free_units)
    result = branch_and_bound(mip, limits)
    if result.x is None:
        return result, None
    sched = extract_schedule(inst, result.x, result.objective, reduce_free_units)
    violations = check_feasibility(inst, sched)
    if violations:
        listing = "; ".join(str(v) for v in violations[:5])
        raise ScheduleError(f"schedule fails {len(violations)} model constraint(s): {listing}")
    return result, sched
