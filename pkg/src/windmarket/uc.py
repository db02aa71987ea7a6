"""Day-ahead unit-commitment model: instance assembly, MILP form, schedule checks."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .fleet import DemandProfile, Fleet, Generator, Participation, classify_participation
from .milp.model import EQ, LE, LinearProgram, MixedIntegerProgram
from .wind import DEFAULT_CURVE, TurbinePowerCurve, WindPowerSeries, WindSpeedSeries, farm_power

POWER_TOL = 1e-4
REL_TOL = 1e-6


class InfeasibilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class UCOptions:
    allow_wind_curtailment: bool = False
    net_price_takers: bool = False
    integer_turbines: bool = False


@dataclass(frozen=True)
class UCInstance:
    fleet: Fleet
    demand: DemandProfile
    wind: WindPowerSeries
    options: UCOptions = UCOptions()
    price_takers: tuple[Generator, ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.wind.power) != len(self.demand.demand):
            raise ValueError(
                f"demand and wind horizons differ ({len(self.demand.demand)} vs {len(self.wind.power)})"
            )

    @property
    def horizon(self) -> int:
        return len(self.demand.demand)

    @property
    def net_demand(self) -> np.ndarray:
        """Demand left for the committed fleet after price-taker output."""
        d = np.array(self.demand.demand)
        for g in self.price_takers:
            d = d - g.p_max
        return d

    @property
    def wind_power(self) -> np.ndarray:
        return np.array(self.wind.power)


@dataclass(frozen=True)
class UCSchedule:
    p: np.ndarray
    on: np.ndarray
    startup: np.ndarray
    objective_value: float
    curtailed_wind: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape


@dataclass(frozen=True)
class Violation:
    family: str
    generator: str | None
    hour: int | None
    magnitude: float

    def __str__(self) -> str:
        where = ", ".join(x for x in (self.generator and f"generator {self.generator}", self.hour is not None and f"hour {self.hour}") if x)
        return f"{self.family} violated by {self.magnitude:.6g}" + (f" ({where})" if where else "")


def build_instance(
    fleet: Fleet,
    demand_day: DemandProfile,
    wind_series: WindSpeedSeries | None,
    capacity: float,
    options: UCOptions = UCOptions(),
    curve: TurbinePowerCurve = DEFAULT_CURVE,
) -> UCInstance:
    if capacity < 0:
        raise ValueError("installed wind capacity must be non-negative")
    T = len(demand_day.demand)
    if wind_series is None or capacity == 0:
        if wind_series is not None and len(wind_series) != T:
            raise ValueError(f"demand and wind horizons differ ({T} vs {len(wind_series)})")
        wind = WindPowerSeries(capacity, (0.0,) * T)
    else:
        if len(wind_series) != T:
            raise ValueError(f"demand and wind horizons differ ({T} vs {len(wind_series)})")
        wind = farm_power(curve, wind_series, capacity, integer_turbines=options.integer_turbines)

    takers: tuple[Generator, ...] = ()
    gens = fleet.generators
    if options.net_price_takers:
        takers = tuple(g for g in gens if classify_participation(g) == Participation.PRICE_TAKER)
        gens = tuple(g for g in gens if classify_participation(g) != Participation.PRICE_TAKER)
        fleet = Fleet(gens, fleet.currency_unit, fleet.metadata)

    notes = []
    residual = np.array(demand_day.demand) - sum((g.p_max for g in takers), 0.0)
    if np.any(residual <= 0):
        raise ValueError("price-taker output exceeds demand")
    excess = np.array(wind.power) - residual
    if not options.allow_wind_curtailment and np.any(excess > 0):
        hours = ", ".join(str(h) for h in np.flatnonzero(excess > 0))
        msg = f"wind exceeds demand at hour(s) {hours} with curtailment disabled; model is infeasible"
        notes.append(msg)
        warnings.warn(msg, InfeasibilityWarning, stacklevel=2)
    return UCInstance(fleet, demand_day, wind, options, takers, tuple(notes))


@dataclass(frozen=True)
class UCLayout:
    """Column indices of each model variable; -1 where a variable is absent."""

    p: np.ndarray
    on: np.ndarray
    startup: np.ndarray
    curtail: np.ndarray
    num_vars: int
    free_units: np.ndarray

    @property
    def binaries(self) -> np.ndarray:
        idx = np.concatenate([self.on.ravel(), self.startup.ravel()])
        return np.sort(idx[idx >= 0])


def free_commitment_units(inst: UCInstance) -> np.ndarray:
    """Units whose on/off status never changes cost or feasibility (no start-up cost, no minimum output)."""
    return np.array([g.startup_cost == 0 and g.p_min == 0 for g in inst.fleet], dtype=bool)


def uc_layout(inst: UCInstance, reduce_free_units: bool = False) -> UCLayout:
    G, T = len(inst.fleet), inst.horizon
    free = free_commitment_units(inst) if reduce_free_units else np.zeros(G, dtype=bool)
    p = np.arange(G * T).reshape(G, T)
    nxt = G * T
    on = np.full((G, T), -1)
    su = np.full((G, T), -1)
    committed = np.flatnonzero(~free)
    k = len(committed) * T
    on[committed] = np.arange(nxt, nxt + k).reshape(-1, T) if k else on[committed]
    nxt += k
    su[committed] = np.arange(nxt, nxt + k).reshape(-1, T) if k else su[committed]
    nxt += k
    curt = np.full(T, -1)
    if inst.options.allow_wind_curtailment:
        curt = np.arange(nxt, nxt + T)
        nxt += T
    return UCLayout(p, on, su, curt, nxt, free)


def to_milp(inst: UCInstance, reduce_free_units: bool = False) -> MixedIntegerProgram:
    """Assemble the commitment MILP for one day.

    Variables are dispatch ``p[g,t]`` (continuous), on-status and start-up
    indicators (binary). The objective prices energy and start-ups; wind is a
    zero-cost fixed injection in the hourly balance. With
    ``reduce_free_units`` the binaries of units that have neither a start-up
    cost nor a minimum output are left out; their status follows from the
    dispatch afterwards.
    """
    lay = uc_layout(inst, reduce_free_units)
    gens = inst.fleet.generators
    G, T = len(gens), inst.horizon
    n = lay.num_vars
    D = inst.net_demand
    W = inst.wind_power

    c = np.zeros(n)
    lb = np.zeros(n)
    ub = np.zeros(n)
    names = [""] * n
    for g, gen in enumerate(gens):
        for t in range(T):
            j = lay.p[g, t]
            c[j], ub[j] = gen.energy_cost, gen.p_max
            names[j] = f"p[{gen.id},{t}]"
            if lay.on[g, t] >= 0:
                j = lay.on[g, t]
                ub[j] = 1.0
                names[j] = f"on[{gen.id},{t}]"
                j = lay.startup[g, t]
                c[j], ub[j] = gen.startup_cost, 1.0
                names[j] = f"su[{gen.id},{t}]"
    for t in range(T):
        j = lay.curtail[t]
        if j >= 0:
            ub[j] = W[t]
            names[j] = f"curtail[{t}]"

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    senses: list[str] = []
    rhs: list[float] = []
    rnames: list[str] = []

    def add(entries, sense, b, name):
        i = len(rhs)
        for j, a in entries:
            rows.append(i)
            cols.append(int(j))
            vals.append(float(a))
        senses.append(sense)
        rhs.append(float(b))
        rnames.append(name)

    for t in range(T):
        entries = [(lay.p[g, t], 1.0) for g in range(G)]
        if lay.curtail[t] >= 0:
            entries.append((lay.curtail[t], -1.0))
        add(entries, EQ, D[t] - W[t], f"balance[{t}]")

    for g, gen in enumerate(gens):
        for t in range(T):
            p, on, su = lay.p[g, t], lay.on[g, t], lay.startup[g, t]
            if on >= 0:
                add([(p, 1.0), (on, -gen.p_max)], LE, 0.0, f"pmax[{gen.id},{t}]")
                if gen.p_min > 0:
                    add([(on, gen.p_min), (p, -1.0)], LE, 0.0, f"pmin[{gen.id},{t}]")
            if t == 0:
                add([(p, 1.0)], LE, gen.ramp_up + gen.initial_power, f"ramp_up[{gen.id},{t}]")
                add([(p, -1.0)], LE, gen.ramp_down - gen.initial_power, f"ramp_down[{gen.id},{t}]")
            else:
                q = lay.p[g, t - 1]
                add([(p, 1.0), (q, -1.0)], LE, gen.ramp_up, f"ramp_up[{gen.id},{t}]")
                add([(q, 1.0), (p, -1.0)], LE, gen.ramp_down, f"ramp_down[{gen.id},{t}]")
            if on < 0:
                continue
            init_on = 1.0 if gen.initial_on else 0.0
            if t == 0:
                add([(on, 1.0), (su, -1.0)], LE, init_on, f"su_link[{gen.id},{t}]")
                add([(su, 1.0)], LE, 1.0 - init_on, f"su_prev_off[{gen.id},{t}]")
            else:
                prev = lay.on[g, t - 1]
                add([(on, 1.0), (prev, -1.0), (su, -1.0)], LE, 0.0, f"su_link[{gen.id},{t}]")
                add([(su, 1.0), (prev, 1.0)], LE, 1.0, f"su_prev_off[{gen.id},{t}]")
            add([(su, 1.0), (on, -1.0)], LE, 0.0, f"su_on[{gen.id},{t}]")

    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), n))
    lp = LinearProgram(c, A, tuple(senses), np.array(rhs), lb, ub, tuple(names), tuple(rnames))
    return MixedIntegerProgram(lp, lay.binaries)


def _check_dims(inst: UCInstance, sched: UCSchedule) -> None:
    G, T = len(inst.fleet), inst.horizon
    for name in ("p", "on", "startup"):
        if getattr(sched, name).shape != (G, T):
            raise ValueError(f"schedule {name} has shape {getattr(sched, name).shape}, expected {(G, T)}")
    if np.shape(sched.curtailed_wind) != (T,):
        raise ValueError(f"curtailed_wind must have {T} entries")


def evaluate_cost(inst: UCInstance, sched: UCSchedule) -> float:
    """Energy plus start-up cost of ``sched``, recomputed from the schedule itself."""
    _check_dims(inst, sched)
    cp = np.array([g.energy_cost for g in inst.fleet])
    csu = np.array([g.startup_cost for g in inst.fleet])
    return float(np.sum(cp[:, None] * sched.p) + np.sum(csu[:, None] * sched.startup))


def _tol(ref: float) -> float:
    return max(POWER_TOL, REL_TOL * abs(ref))


def check_feasibility(inst: UCInstance, sched: UCSchedule) -> list[Violation]:
    _check_dims(inst, sched)
    out: list[Violation] = []
    gens = inst.fleet.generators
    T = inst.horizon
    D, W = inst.net_demand, inst.wind_power
    p, on, su, curt = sched.p, sched.on, sched.startup, np.asarray(sched.curtailed_wind, dtype=float)

    for arr, fam in ((on, "binary_on"), (su, "binary_startup")):
        bad = np.abs(arr - np.round(arr)) > 1e-6
        bad |= (arr < -1e-6) | (arr > 1 + 1e-6)
        for g, t in zip(*np.nonzero(bad)):
            out.append(Violation(fam, gens[g].id, int(t), float(abs(arr[g, t] - np.round(arr[g, t])))))

    for t in range(T):
        if curt[t] < -POWER_TOL or curt[t] > W[t] + POWER_TOL:
            out.append(Violation("curtailment", None, t, float(max(-curt[t], curt[t] - W[t]))))
        if curt[t] > POWER_TOL and not inst.options.allow_wind_curtailment:
            out.append(Violation("curtailment", None, t, float(curt[t])))
        resid = p[:, t].sum() + W[t] - curt[t] - D[t]
        if abs(resid) > _tol(D[t]):
            out.append(Violation("balance", None, t, float(abs(resid))))

    for g, gen in enumerate(gens):
        prev_p = gen.initial_power
        prev_on = 1.0 if gen.initial_on else 0.0
        for t in range(T):
            lo, hi = on[g, t] * gen.p_min, on[g, t] * gen.p_max
            if p[g, t] > hi + _tol(gen.p_max):
                out.append(Violation("bounds", gen.id, t, float(p[g, t] - hi)))
            elif p[g, t] < lo - _tol(gen.p_max):
                out.append(Violation("bounds", gen.id, t, float(lo - p[g, t])))
            step = p[g, t] - prev_p
            if step > gen.ramp_up + _tol(gen.ramp_up):
                out.append(Violation("ramp_up", gen.id, t, float(step - gen.ramp_up)))
            if -step > gen.ramp_down + _tol(gen.ramp_down):
                out.append(Violation("ramp_down", gen.id, t, float(-step - gen.ramp_down)))
            s = su[g, t]
            for mag in (on[g, t] - prev_on - s, s - (1 - prev_on), s - on[g, t]):
                if mag > 1e-6:
                    out.append(Violation("startup", gen.id, t, float(mag)))
            prev_p, prev_on = p[g, t], on[g, t]
    return out


def write_schedule_csv(inst: UCInstance, sched: UCSchedule, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generator", "hour", "p", "on", "startup"])
        for g, gen in enumerate(inst.fleet):
            for t in range(inst.horizon):
                w.writerow([gen.id, t, f"{sched.p[g, t]:.6f}", int(round(sched.on[g, t])), int(round(sched.startup[g, t]))])


def write_schedule_json(
    inst: UCInstance,
    sched: UCSchedule,
    path: str | Path,
    extra: dict | None = None,
) -> None:
    violations = check_feasibility(inst, sched)
    doc = {
        "day_label": inst.demand.day_label,
        "wind_capacity_mw": inst.wind.installed_capacity,
        "objective_cop": round(sched.objective_value, 6),
        "generators": [g.id for g in inst.fleet],
        "p": np.round(sched.p, 6).tolist(),
        "on": np.rint(sched.on).astype(int).tolist(),
        "startup": np.rint(sched.startup).astype(int).tolist(),
        "curtailed_wind": np.round(sched.curtailed_wind, 6).tolist(),
        "violations": [str(v) for v in violations],
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_schedule_csv(inst: UCInstance, path: str | Path) -> UCSchedule:
    G, T = len(inst.fleet), inst.horizon
    p = np.zeros((G, T))
    on = np.zeros((G, T))
    su = np.zeros((G, T))
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            g = inst.fleet.index(row["generator"])
            t = int(row["hour"])
            p[g, t], on[g, t], su[g, t] = float(row["p"]), float(row["on"]), float(row["startup"])
    sched = UCSchedule(p, on, su, 0.0, np.zeros(T))
    return UCSchedule(p, on, su, evaluate_cost(inst, sched), np.zeros(T))
