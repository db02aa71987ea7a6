"""Capacity sweeps and the aggregations built on them."""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fleet import DemandProfile, Fleet, Tech
from .milp.bnb import Limits
from .milp.model import Status
from .milp.ucsolve import ScheduleError, solve_uc
from .pricing import (
    DISPATCH_TOL,
    PriceReport,
    SettlementReport,
    UpliftConvention,
    delivered_wind,
    price_day,
    settle,
)
from .uc import UCOptions, UCSchedule, build_instance
from .wind import DEFAULT_CURVE, TurbinePowerCurve, WindSpeedSeries

CASES = {"A": 0.0, "B": 505.5, "C": 1000.0}
SOLVED = (Status.OPTIMAL.value, Status.GAP_LIMIT.value)
TECH_ORDER = (Tech.HYDRO, Tech.SMALL_HYDRO, Tech.GAS, Tech.COAL, Tech.WIND)


def default_grid() -> tuple[float, ...]:
    """0 to 1000 MW in 50 MW steps, plus the 505.5 MW case."""
    return tuple(sorted({float(x) for x in range(0, 1001, 50)} | {CASES["B"]}))


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse ``"0,505.5,1000"`` or a ``start:stop:step`` range (stop inclusive)."""
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"bad grid range {text!r}; expected start:stop:step")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9))
        grid = [round(start + k * step, 9) for k in range(n + 1)]
    else:
        grid = [float(x) for x in text.split(",") if x.strip()]
    return validate_grid(grid)


def validate_grid(grid) -> tuple[float, ...]:
    grid = tuple(float(x) for x in grid)
    if not grid:
        raise ValueError("capacity grid is empty")
    if any(x < 0 or not math.isfinite(x) for x in grid):
        raise ValueError("capacities must be finite and non-negative")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("capacity grid must be strictly increasing")
    return grid


@dataclass(frozen=True)
class CellResult:
    day: str
    capacity: float
    status: str
    message: str = ""
    gap: float = math.inf
    nodes: int = 0
    objective: float = math.nan
    total_demand: float = math.nan
    schedule: UCSchedule | None = None
    prices: PriceReport | None = None
    settlement: SettlementReport | None = None
    generator_ids: tuple[str, ...] = ()
    tech_energy: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in SOLVED and self.schedule is not None

    @property
    def avg_cost(self) -> float:
        return self.objective / self.total_demand

    def hours(self, g: int) -> int:
        return int(np.sum(self.schedule.p[g] > DISPATCH_TOL))


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[float, ...]
    days: tuple[str, ...]
    cells: tuple[CellResult, ...]
    generator_ids: tuple[str, ...]
    complete: bool = True

    def __post_init__(self) -> None:
        validate_grid(self.grid)

    def cell(self, day: str, capacity: float) -> CellResult:
        for c in self.cells:
            if c.day == day and c.capacity == capacity:
                return c
        raise KeyError((day, capacity))

    def at(self, capacity: float) -> list[CellResult]:
        return [c for c in self.cells if c.capacity == capacity and c.ok]


@dataclass(frozen=True)
class SweepSetup:
    fleet: Fleet
    options: UCOptions = UCOptions()
    curve: TurbinePowerCurve = DEFAULT_CURVE
    limits: Limits = Limits()
    convention: UpliftConvention = UpliftConvention.MAKE_WHOLE


def solve_cell(setup: SweepSetup, demand: DemandProfile, wind: WindSpeedSeries | None, capacity: float) -> CellResult:
    """Solve, price and settle one (day, capacity) pair; failures become a status, not an exception."""
    ids = tuple(g.id for g in setup.fleet)
    base = dict(day=demand.day_label, capacity=float(capacity), generator_ids=ids)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            inst = build_instance(setup.fleet, demand, wind, capacity, setup.options, setup.curve)
        result, sched = solve_uc(inst, setup.limits)
    except (ValueError, ScheduleError) as exc:
        return CellResult(status="Error", message=str(exc), **base)
    if sched is None:
        return CellResult(status=result.status.value, message=result.message, gap=result.gap, nodes=result.nodes, **base)
    prices = price_day(inst, sched, setup.convention)
    settlement = settle(inst, sched, prices)
    tech_energy = {t.value: 0.0 for t in TECH_ORDER}
    for g, gen in enumerate(inst.fleet):
        tech_energy[gen.tech.value] += float(sched.p[g].sum())
    for gen in inst.price_takers:
        tech_energy[gen.tech.value] += gen.p_max * inst.horizon
    tech_energy[Tech.WIND.value] += float(delivered_wind(inst, sched).sum())
    if setup.options.net_price_takers:
        # keep per-unit arrays aligned with the full fleet
        full = np.zeros((len(ids), inst.horizon))
        for g, gen in enumerate(inst.fleet):
            full[ids.index(gen.id)] = sched.p[g]
        sched = UCSchedule(full, full > DISPATCH_TOL, np.zeros_like(full), sched.objective_value, sched.curtailed_wind)
    return CellResult(
        status=result.status.value,
        message=result.message,
        gap=result.gap,
        nodes=result.nodes,
        objective=result.objective,
        total_demand=float(np.sum(demand.demand)),
        schedule=sched,
        prices=prices,
        settlement=settlement,
        tech_energy=tech_energy,
        **base,
    )


def _solve_task(args):
    return solve_cell(*args)


def run_sweep(
    setup: SweepSetup,
    demand_days: list[DemandProfile],
    wind_days: list[WindSpeedSeries] | None,
    grid=None,
    *,
    jobs: int = 1,
    progress=None,
) -> SweepResult:
    """Solve every (day, capacity) cell independently.

    Cells are collected in day-major, capacity-minor order whatever ``jobs``
    is. A keyboard interrupt stops the sweep and returns the finished cells
    with ``complete=False``.
    """
    grid = default_grid() if grid is None else validate_grid(grid)
    if not demand_days:
        raise ValueError("no demand days given")
    if wind_days is not None and len(wind_days) != len(demand_days):
        raise ValueError(f"{len(demand_days)} demand days but {len(wind_days)} wind days")
    tasks = []
    for d, demand in enumerate(demand_days):
        wind = wind_days[d] if wind_days is not None else None
        for cap in grid:
            tasks.append((setup, demand, wind, cap))
    cells: list[CellResult] = []
    complete = True
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for cell in pool.map(_solve_task, tasks):
                    cells.append(cell)
                    if progress:
                        progress(cell, len(cells), len(tasks))
        else:
            for task in tasks:
                cells.append(_solve_task(task))
                if progress:
                    progress(cells[-1], len(cells), len(tasks))
    except KeyboardInterrupt:
        complete = False
    ids = tuple(g.id for g in setup.fleet)
    return SweepResult(grid, tuple(d.day_label for d in demand_days), tuple(cells), ids, complete)


@dataclass(frozen=True)
class CostStats:
    n: int
    min: float
    mean: float
    max: float
    std: float


def _stats(values) -> CostStats:
    v = np.asarray(values, float)
    std = float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
    return CostStats(len(v), float(v.min()), float(v.mean()), float(v.max()), std)


def avg_daily_cost(sweep: SweepResult) -> dict[float, CostStats]:
    """Statistics across days of objective / total demand (COP/MWh) per capacity."""
    out = {}
    for cap in sweep.grid:
        cells = sweep.at(cap)
        if not cells:
            warnings.warn(f"no solved cells at {cap:g} MW; capacity left out", stacklevel=2)
            continue
        out[cap] = _stats([c.avg_cost for c in cells])
    return out


def cell_shares(cell: CellResult) -> dict[str, float]:
    total = sum(cell.tech_energy.values())
    return {k: v / total for k, v in cell.tech_energy.items()}


@dataclass(frozen=True)
class ShareBreakdown:
    capacity: float
    mean: dict[str, float]
    std: dict[str, float]


def share_by_type(sweep: SweepResult) -> dict[float, ShareBreakdown]:
    out = {}
    for cap in sweep.grid:
        cells = sweep.at(cap)
        if not cells:
            continue
        table = np.array([[cell_shares(c)[t.value] for t in TECH_ORDER] for c in cells])
        std = table.std(axis=0, ddof=1) if len(cells) > 1 else np.zeros(len(TECH_ORDER))
        out[cap] = ShareBreakdown(
            cap,
            {t.value: float(m) for t, m in zip(TECH_ORDER, table.mean(axis=0))},
            {t.value: float(s) for t, s in zip(TECH_ORDER, std)},
        )
    return out


def share_change(sweep: SweepResult) -> dict[float, dict[str, float]]:
    """Mean share at each capacity minus the mean share at the first grid point."""
    shares = share_by_type(sweep)
    if not shares:
        return {}
    ref = shares[min(shares)].mean
    return {cap: {k: s.mean[k] - ref[k] for k in ref} for cap, s in shares.items()}


def mean_spot(sweep: SweepResult) -> dict[float, np.ndarray]:
    """Hourly spot price averaged across days, per capacity."""
    return {cap: np.mean([c.prices.spot for c in sweep.at(cap)], axis=0) for cap in sweep.grid if sweep.at(cap)}


@dataclass(frozen=True)
class TrajectoryPoint:
    capacity: float
    hours: float
    net_revenue: float
    relative_revenue: float | None


def unit_trajectory(sweep: SweepResult, generator_id: str) -> list[TrajectoryPoint]:
    """Mean daily operating hours and net revenue of one unit across the grid.

    Relative revenue divides by the value at the first grid point and is
    ``None`` when that baseline is zero.
    """
    if generator_id not in sweep.generator_ids:
        raise KeyError(f"unknown generator {generator_id!r}")
    g = sweep.generator_ids.index(generator_id)
    points = []
    for cap in sweep.grid:
        cells = sweep.at(cap)
        if not cells:
            continue
        hours = float(np.mean([c.hours(g) for c in cells]))
        rev = float(np.mean([_net_revenue(c, generator_id) for c in cells]))
        points.append((cap, hours, rev))
    if not points:
        return []
    base = points[0][2]
    return [TrajectoryPoint(cap, h, r, (r / base) if base != 0 else None) for cap, h, r in points]


def _net_revenue(cell: CellResult, generator_id: str) -> float:
    try:
        return cell.settlement.get(generator_id).net_revenue
    except KeyError:
        return 0.0


# ---- report files -------------------------------------------------------

def _num(v: float) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return f"{v:.6f}"


def _cap(v: float) -> str:
    return f"{v:g}"


def tidy_rows(sweep: SweepResult):
    """(day, capacity, metric, value) rows for every solved cell."""
    for c in sweep.cells:
        if not c.ok:
            continue
        rows = [
            ("objective_cop", c.objective),
            ("total_demand_mwh", c.total_demand),
            ("avg_cost_cop_mwh", c.avg_cost),
            ("uplift_cop_mwh", c.prices.uplift),
            ("mip_gap", c.gap),
        ]
        rows += [(f"mpo_h{t:02d}", v) for t, v in enumerate(c.prices.mpo)]
        rows += [(f"spot_h{t:02d}", v) for t, v in enumerate(c.prices.spot)]
        shares = cell_shares(c)
        for t in TECH_ORDER:
            rows.append((f"energy_{t.value}", c.tech_energy[t.value]))
            rows.append((f"share_{t.value}", shares[t.value]))
        for g, gid in enumerate(c.generator_ids):
            rows.append((f"hours_{gid}", c.hours(g)))
            rows.append((f"net_revenue_{gid}", _net_revenue(c, gid)))
        for metric, value in rows:
            yield c.day, c.capacity, metric, value


def write_sweep_reports(sweep: SweepResult, out: str | Path, track: tuple[str, ...] = (), extra: dict | None = None) -> list[Path]:
    """Write the tidy tables, per-figure ``.dat`` files and a summary; returns the paths written."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def table(name, header, rows, sep=","):
        path = out / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if sep == ",":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
            else:
                fh.write("# " + " ".join(header) + "\n")
                for r in rows:
                    fh.write(" ".join(r) + "\n")
        written.append(path)

    table(
        "cells.csv",
        ["day", "capacity_mw", "status", "gap", "nodes", "message"],
        [[c.day, _cap(c.capacity), c.status, _num(c.gap), c.nodes, c.message] for c in sweep.cells],
    )
    table(
        "metrics.csv",
        ["day", "capacity_mw", "metric", "value"],
        [[d, _cap(cap), m, v if isinstance(v, int) else _num(v)] for d, cap, m, v in tidy_rows(sweep)],
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        costs = avg_daily_cost(sweep)
    table(
        "avg_daily_cost.dat",
        ["capacity_mw", "n", "min", "mean", "max", "std"],
        [[_cap(k), str(s.n), _num(s.min), _num(s.mean), _num(s.max), _num(s.std)] for k, s in costs.items()],
        sep=" ",
    )
    spots = mean_spot(sweep)
    caps = list(spots)
    table(
        "spot_price.dat",
        ["hour"] + [f"spot_{_cap(c)}MW" for c in caps],
        [[str(t)] + [_num(spots[c][t]) for c in caps] for t in range(len(next(iter(spots.values()))))] if spots else [],
        sep=" ",
    )
    shares = share_by_type(sweep)
    techs = [t.value for t in TECH_ORDER]
    table(
        "share_by_type.dat",
        ["capacity_mw"] + [f"{t}_mean {t}_std" for t in techs],
        [[_cap(k)] + [f"{_num(s.mean[t])} {_num(s.std[t])}" for t in techs] for k, s in shares.items()],
        sep=" ",
    )
    change = share_change(sweep)
    table(
        "share_change.dat",
        ["capacity_mw"] + [f"{t}_pp" for t in techs],
        [[_cap(k)] + [_num(100 * v[t]) for t in techs] for k, v in change.items()],
        sep=" ",
    )
    for gid in track:
        traj = unit_trajectory(sweep, gid)
        table(
            f"unit_{gid}.dat",
            ["capacity_mw", "hours", "net_revenue", "relative_revenue"],
            [[_cap(p.capacity), _num(p.hours), _num(p.net_revenue), "nan" if p.relative_revenue is None else _num(p.relative_revenue)] for p in traj],
            sep=" ",
        )
    counts: dict[str, int] = {}
    for c in sweep.cells:
        counts[c.status] = counts.get(c.status, 0) + 1
    summary = {
        "complete": sweep.complete,
        "cells_expected": len(sweep.days) * len(sweep.grid),
        "cells_done": len(sweep.cells),
        "status_counts": dict(sorted(counts.items())),
        "grid_mw": list(sweep.grid),
        "days": list(sweep.days),
        "tracked_units": list(track),
    }
    if extra:
        summary.update(extra)
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    if not sweep.complete:
        marker = out / "INCOMPLETE"
        marker.write_text(f"sweep interrupted after {len(sweep.cells)} of {summary['cells_expected']} cells\n", encoding="utf-8")
        written.append(marker)
    return written


def read_metrics(path: str | Path) -> dict[tuple[str, float, str], float]:
    """Load ``metrics.csv`` back into a {(day, capacity, metric): value} map."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[(row["day"], float(row["capacity_mw"]), row["metric"])] = float(row["value"])
    return out
