"""Spot price with start-up uplift, and per-unit settlement of a solved day."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .uc import UCInstance, UCSchedule, check_feasibility, to_milp, uc_layout

DISPATCH_TOL = 1e-4
WIND_ID = "wind"


class UpliftConvention(str, Enum):
    # pay units whose start-up cost the marginal price leaves unrecovered
    MAKE_WHOLE = "make-whole"
    # literal max{0, C_mpo - C_plant} form
    AS_PRINTED = "as-printed"


@dataclass(frozen=True)
class PriceReport:
    mpo: np.ndarray
    uplift: float
    spot: np.ndarray
    all_wind_hours: tuple[int, ...] = ()
    convention: UpliftConvention = UpliftConvention.MAKE_WHOLE

    def __post_init__(self) -> None:
        if self.uplift < 0:
            raise ValueError("uplift must be non-negative")
        if np.shape(self.mpo) != np.shape(self.spot):
            raise ValueError("mpo and spot must have the same length")


@dataclass(frozen=True)
class UnitSettlement:
    generator: str
    energy: float
    energy_revenue: float
    c_plant: float
    c_mpo: float
    keeps_uplift: bool
    reimbursement: float

    @property
    def net_revenue(self) -> float:
        return self.energy_revenue - self.reimbursement

    @property
    def retained_uplift(self) -> float:
        return self.energy_revenue - self.c_mpo - self.reimbursement


@dataclass(frozen=True)
class SettlementReport:
    units: tuple[UnitSettlement, ...]
    demand_payment: float

    def get(self, generator_id: str) -> UnitSettlement:
        for u in self.units:
            if u.generator == generator_id:
                return u
        raise KeyError(generator_id)

    @property
    def total_reimbursement(self) -> float:
        return float(sum(u.reimbursement for u in self.units))

    @property
    def total_retained(self) -> float:
        return float(sum(u.retained_uplift for u in self.units))

    def conservation_residuals(self) -> tuple[float, float]:
        """Relative residuals of the two money balances.

        Gross: demand payment equals what all injections are paid at spot.
        Net: demand payment less refunds equals marginal-price revenue plus
        uplift retained by the units that keep it.
        """
        scale = max(abs(self.demand_payment), 1.0)
        gross = self.demand_payment - sum(u.energy_revenue for u in self.units)
        net = (self.demand_payment - self.total_reimbursement) - (
            sum(u.c_mpo for u in self.units) + self.total_retained
        )
        return abs(gross) / scale, abs(net) / scale


def _injections(inst: UCInstance, sched: UCSchedule):
    """(id, energy cost, start-up cost, hourly output, start-ups) for every paid injection."""
    T = inst.horizon
    out = []
    for g, gen in enumerate(inst.fleet):
        out.append((gen.id, gen.energy_cost, gen.startup_cost, np.asarray(sched.p[g], float), np.asarray(sched.startup[g], float)))
    for gen in inst.price_takers:
        out.append((gen.id, gen.energy_cost, 0.0, np.full(T, gen.p_max), np.zeros(T)))
    return out


def delivered_wind(inst: UCInstance, sched: UCSchedule) -> np.ndarray:
    return inst.wind_power - np.asarray(sched.curtailed_wind, float)


def _require_feasible(inst: UCInstance, sched: UCSchedule) -> None:
    bad = check_feasibility(inst, sched)
    if bad:
        raise ValueError(f"cannot price an infeasible schedule ({len(bad)} violation(s), first: {bad[0]})")


def marginal_prices(inst: UCInstance, sched: UCSchedule, *, check: bool = True) -> tuple[np.ndarray, tuple[int, ...]]:
    """Hourly cost of the most expensive dispatched unit, plus the hours no unit ran.

    Those hours are served entirely by wind (and price takers) and price at 0.
    """
    if check:
        _require_feasible(inst, sched)
    cp = np.array([g.energy_cost for g in inst.fleet])
    running = np.asarray(sched.p) > DISPATCH_TOL
    masked = np.where(running, cp[:, None], -np.inf)
    mpo = masked.max(axis=0, initial=-np.inf)
    empty = tuple(int(t) for t in np.flatnonzero(~running.any(axis=0)))
    mpo[list(empty)] = 0.0
    return mpo, empty


def unit_costs(inst: UCInstance, sched: UCSchedule, mpo: np.ndarray) -> list[tuple[str, float, float]]:
    """(id, C_plant, C_mpo) per committed unit."""
    mpo = np.asarray(mpo, float)
    if mpo.shape != (inst.horizon,):
        raise ValueError(f"mpo must have {inst.horizon} entries")
    rows = []
    for g, gen in enumerate(inst.fleet):
        p = np.asarray(sched.p[g], float)
        c_plant = float(gen.energy_cost * p.sum() + gen.startup_cost * np.asarray(sched.startup[g]).sum())
        rows.append((gen.id, c_plant, float(mpo @ p)))
    return rows


def _shortfall(cp: float, csu: float, p: np.ndarray, su: np.ndarray, mpo: np.ndarray) -> float:
    """C_plant - C_mpo, summed hour by hour.

    Each hourly term is exactly non-positive when the unit's cost is at or
    below that hour's price, so a fleet without start-up costs yields an
    uplift of exactly zero instead of rounding noise.
    """
    return float(np.sum((cp - mpo) * p) + csu * np.sum(su))


def uplift(
    inst: UCInstance,
    sched: UCSchedule,
    mpo: np.ndarray,
    convention: UpliftConvention | str = UpliftConvention.MAKE_WHOLE,
) -> float:
    """Per-MWh adder spread over the day's demand."""
    convention = UpliftConvention(convention)
    mpo = np.asarray(mpo, float)
    if mpo.shape != (inst.horizon,):
        raise ValueError(f"mpo must have {inst.horizon} entries")
    total_demand = float(np.sum(inst.demand.demand))
    if total_demand <= 0:
        raise ValueError("total demand must be positive")
    total = 0.0
    for g, gen in enumerate(inst.fleet):
        gap = _shortfall(gen.energy_cost, gen.startup_cost, np.asarray(sched.p[g], float), np.asarray(sched.startup[g], float), mpo)
        total += max(0.0, gap) if convention is UpliftConvention.MAKE_WHOLE else max(0.0, -gap)
    return total / total_demand


def spot_price(mpo: np.ndarray, uplift_value: float) -> np.ndarray:
    if uplift_value < 0:
        raise ValueError("uplift must be non-negative")
    return np.asarray(mpo, float) + uplift_value


def price_day(
    inst: UCInstance,
    sched: UCSchedule,
    convention: UpliftConvention | str = UpliftConvention.MAKE_WHOLE,
) -> PriceReport:
    convention = UpliftConvention(convention)
    mpo, empty = marginal_prices(inst, sched)
    up = uplift(inst, sched, mpo, convention)
    return PriceReport(mpo, up, spot_price(mpo, up), empty, convention)


def _keeps(gap: float, convention: UpliftConvention) -> bool:
    if convention is UpliftConvention.MAKE_WHOLE:
        return gap > 0
    return gap < 0


def settle(inst: UCInstance, sched: UCSchedule, prices: PriceReport) -> SettlementReport:
    """Pay every injection the spot price and claw back uplift from units that did not need it.

    A unit keeps its uplift share when it is in the group the uplift was
    raised for (unrecovered cost under make-whole); the rest reimburse
    ``uplift * energy``. Wind is paid like any other injection, with zero cost.
    """
    spot, mpo, up = np.asarray(prices.spot), np.asarray(prices.mpo), prices.uplift
    units = []
    for gid, cp, csu, p, su in _injections(inst, sched):
        energy = float(p.sum())
        c_plant = float(cp * energy + csu * su.sum())
        c_mpo = float(mpo @ p)
        keep = _keeps(_shortfall(cp, csu, p, su, mpo), prices.convention)
        units.append(UnitSettlement(gid, energy, float(spot @ p), c_plant, c_mpo, keep, 0.0 if keep else up * energy))
    w = delivered_wind(inst, sched)
    if np.any(w > 0):
        c_mpo = float(mpo @ w)
        keep = _keeps(_shortfall(0.0, 0.0, w, np.zeros(0), mpo), prices.convention)
        energy = float(w.sum())
        units.append(UnitSettlement(WIND_ID, energy, float(spot @ w), 0.0, c_mpo, keep, 0.0 if keep else up * energy))
    demand_payment = float(spot @ np.asarray(inst.demand.demand, float))
    return SettlementReport(tuple(units), demand_payment)


def dual_prices(inst: UCInstance, sched: UCSchedule) -> np.ndarray:
    """Experimental: hourly balance-row duals with commitment fixed at ``sched``.

    Degenerate dispatches admit several valid duals; the value returned is
    whichever the simplex basis produces. Not used by the default pipeline.
    """
    from .milp.simplex import simplex_solve

    mip = to_milp(inst)
    lay = uc_layout(inst)
    lp = mip.lp
    lb, ub = lp.lb.copy(), lp.ub.copy()
    for idx, vals in ((lay.on, sched.on), (lay.startup, sched.startup)):
        lb[idx.ravel()] = ub[idx.ravel()] = np.round(np.asarray(vals)).ravel()
    res = simplex_solve(lp.with_bounds(lb, ub))
    if res.duals is None:
        raise ValueError(f"fixed-commitment LP did not solve: {res.status.value}")
    return np.asarray(res.duals[: inst.horizon])


def write_prices_csv(prices: PriceReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hour", "mpo", "spot"])
        for t, (m, s) in enumerate(zip(prices.mpo, prices.spot)):
            w.writerow([t, f"{m:.6f}", f"{s:.6f}"])


def write_settlement_csv(report: SettlementReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generator", "energy_revenue", "c_plant", "c_mpo", "reimbursement", "net_revenue"])
        for u in report.units:
            w.writerow([u.generator] + [f"{v:.6f}" for v in (u.energy_revenue, u.c_plant, u.c_mpo, u.reimbursement, u.net_revenue)])
