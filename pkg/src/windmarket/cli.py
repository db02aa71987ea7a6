"""Command-line entry point: ``windmarket {solve,sweep,windstats,validate}``."""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .analytics import SweepSetup, default_grid, parse_grid, run_sweep, write_sweep_reports
from .fleet import FleetError, Tech, classify_participation, load_demand, load_fleet
from .milp.bnb import Limits
from .milp.model import Status
from .milp.ucsolve import ScheduleError, solve_uc
from .pricing import UpliftConvention, price_day, settle, write_prices_csv, write_settlement_csv
from .uc import UCOptions, build_instance, write_schedule_csv, write_schedule_json
from .wind import DEFAULT_CURVE, concat, histogram, load_curve, load_wind, summarize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3
EXIT_LIMIT = 4
EXIT_INTERRUPTED = 130


class UsageError(Exception):
    pass


def bundled(name: str) -> Path:
    return Path(str(resources.files("windmarket") / "data" / name))


DEFAULTS = {
    "fleet": None,
    "demand": None,
    "wind": None,
    "curve": None,
    "grid": None,
    "time_limit": "60",
    "mip_gap": "1e-4",
    "uplift_convention": UpliftConvention.MAKE_WHOLE.value,
    "curtailment": "false",
    "out": "out",
    "jobs": "1",
    "days": None,
    "day": None,
    "capacity": "0",
    "track": None,
    "bin_width": "1",
}


@dataclass
class RunConfig:
    fleet: Path
    demand: Path
    wind: Path | None
    curve: Path | None
    grid: tuple[float, ...]
    limits: Limits
    convention: UpliftConvention
    curtailment: bool
    out: Path
    jobs: int
    days: list[str] | None = None
    day: str | None = None
    capacity: float = 0.0
    track: tuple[str, ...] | None = None
    bin_width: float = 1.0
    sources: dict = field(default_factory=dict)


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    for n, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}, line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}, line {n}: unknown key {key!r}")
        out[key] = value
    return out


def _bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"{key}: expected true/false, got {text!r}")


def _number(text: str, key: str, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise UsageError(f"{key}: not a valid number: {text!r}") from None


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and command-line flags (flags win)."""
    values = dict(DEFAULTS)
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = str(v) if not isinstance(v, bool) else ("true" if v else "false")

    def path_of(key: str, default: str | None) -> Path | None:
        v = values[key]
        if v is None:
            return bundled(default) if default else None
        p = Path(v)
        if not p.is_file():
            raise UsageError(f"{key} file not found or not readable: {p}")
        return p

    try:
        grid = default_grid() if values["grid"] is None else parse_grid(values["grid"])
    except ValueError as exc:
        raise UsageError(f"grid: {exc}") from None
    time_limit = _number(values["time_limit"], "time_limit")
    mip_gap = _number(values["mip_gap"], "mip_gap")
    try:
        limits = Limits(mip_gap=mip_gap, time_limit=time_limit)
        convention = UpliftConvention(values["uplift_convention"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    jobs = _number(values["jobs"], "jobs", int)
    if jobs < 1:
        raise UsageError("jobs must be at least 1")
    bin_width = _number(values["bin_width"], "bin_width")
    if bin_width <= 0:
        raise UsageError("bin_width must be positive")
    capacity = _number(values["capacity"], "capacity")
    if capacity < 0:
        raise UsageError("capacity must be non-negative")
    split = lambda v: [s.strip() for s in v.split(",") if s.strip()] if v else None  # noqa: E731
    track = split(values["track"])
    return RunConfig(
        fleet=path_of("fleet", "fleet_desk.csv"),
        demand=path_of("demand", "demand_desk.csv"),
        wind=path_of("wind", "wind.csv"),
        curve=path_of("curve", "curve.csv"),
        grid=grid,
        limits=limits,
        convention=convention,
        curtailment=_bool(values["curtailment"], "curtailment"),
        out=Path(values["out"]),
        jobs=jobs,
        days=split(values["days"]),
        day=values["day"],
        capacity=capacity,
        track=None if track is None else tuple(track),
        bin_width=bin_width,
        sources={k: v for k, v in values.items()},
    )


def _load_inputs(cfg: RunConfig):
    fleet = load_fleet(cfg.fleet)
    demand = load_demand(cfg.demand)
    wind = load_wind(cfg.wind) if cfg.wind else None
    curve = load_curve(cfg.curve) if cfg.curve else DEFAULT_CURVE
    if wind is not None:
        by_label = {w.site: w for w in wind}
        if all(d.day_label in by_label for d in demand):
            wind = [by_label[d.day_label] for d in demand]
        elif len(wind) != len(demand):
            raise FleetError(f"{len(demand)} demand days but {len(wind)} wind days, and labels do not match")
    return fleet, demand, wind, curve


def _select_days(cfg: RunConfig, demand, wind):
    if not cfg.days:
        return demand, wind
    idx = []
    labels = [d.day_label for d in demand]
    for item in cfg.days:
        if item in labels:
            idx.append(labels.index(item))
        elif item.isdigit() and 1 <= int(item) <= len(demand):
            idx.append(int(item) - 1)
        else:
            raise UsageError(f"unknown day {item!r}")
    return [demand[i] for i in idx], None if wind is None else [wind[i] for i in idx]


def cmd_solve(cfg: RunConfig) -> int:
    fleet, demand, wind, curve = _load_inputs(cfg)
    day = cfg.day or demand[0].day_label
    days, winds = _select_days(RunConfig(**{**cfg.__dict__, "days": [day]}), demand, wind)
    options = UCOptions(allow_wind_curtailment=cfg.curtailment)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        inst = build_instance(fleet, days[0], winds[0] if winds else None, cfg.capacity, options, curve)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    result, sched = solve_uc(inst, cfg.limits)
    print(f"day={days[0].day_label} capacity_mw={cfg.capacity:g} status={result.status.value} "
          f"objective={result.objective:.6f} gap={result.gap:.6g} nodes={result.nodes}")
    if sched is None:
        if result.status == Status.INFEASIBLE:
            print("error: the commitment model has no feasible schedule", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"error: solver stopped ({result.status.value}) without a feasible schedule", file=sys.stderr)
        return EXIT_LIMIT
    prices = price_day(inst, sched, cfg.convention)
    report = settle(inst, sched, prices)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_schedule_csv(inst, sched, cfg.out / "schedule.csv")
    write_schedule_json(inst, sched, cfg.out / "schedule.json", {"status": result.status.value, "gap": result.gap})
    write_prices_csv(prices, cfg.out / "prices.csv")
    write_settlement_csv(report, cfg.out / "settlement.csv")
    note = f" (all-wind hours priced at 0: {list(prices.all_wind_hours)})" if prices.all_wind_hours else ""
    print(f"uplift={prices.uplift:.6f} avg_cost={result.objective / days[0].total:.6f} out={cfg.out}{note}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    from .plotting import sweep_figures

    fleet, demand, wind, curve = _load_inputs(cfg)
    demand, wind = _select_days(cfg, demand, wind)
    track = cfg.track
    if track is None:
        track = tuple(g.id for g in fleet if g.tech == Tech.GAS)
    for gid in track:
        if gid not in {g.id for g in fleet}:
            raise UsageError(f"track: unknown generator {gid!r}")
    setup = SweepSetup(fleet, UCOptions(allow_wind_curtailment=cfg.curtailment), curve, cfg.limits, cfg.convention)

    def progress(cell, done, total):
        print(f"[{done}/{total}] {cell.day} {cell.capacity:g} MW {cell.status}", file=sys.stderr)

    sweep = run_sweep(setup, demand, wind, cfg.grid, jobs=cfg.jobs, progress=progress)
    extra = {"uplift_convention": cfg.convention.value, "mip_gap": cfg.limits.mip_gap,
             "time_limit_s": cfg.limits.time_limit, "curtailment": cfg.curtailment}
    written = write_sweep_reports(sweep, cfg.out, track, extra)
    if sweep.complete:
        written += sweep_figures(sweep, cfg.out, track)
    failed = [c for c in sweep.cells if not c.ok]
    print(f"cells={len(sweep.cells)} solved={len(sweep.cells) - len(failed)} failed={len(failed)} "
          f"complete={'yes' if sweep.complete else 'no'} out={cfg.out}")
    for c in failed[:10]:
        print(f"  {c.day} {c.capacity:g} MW: {c.status} {c.message}", file=sys.stderr)
    return EXIT_OK if sweep.complete else EXIT_INTERRUPTED


def cmd_windstats(cfg: RunConfig) -> int:
    from .plotting import plot_histogram

    if cfg.wind is None:
        raise UsageError("windstats needs a wind file")
    days = load_wind(cfg.wind)
    if not days:
        raise FleetError(f"{cfg.wind}: no wind rows")
    series = concat(days, site=cfg.wind.stem)
    stats = summarize(series)
    bins = histogram(series, cfg.bin_width)
    cfg.out.mkdir(parents=True, exist_ok=True)
    with open(cfg.out / "wind_stats.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["statistic", "value_ms"])
        for k, v in stats.as_rows():
            w.writerow([k, f"{v:.6f}"])
    with open(cfg.out / "wind_histogram.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_start_ms", "bin_end_ms", "count"])
        for start, n in bins:
            w.writerow([f"{start:g}", f"{start + cfg.bin_width:g}", n])
    plot_histogram(bins, cfg.bin_width, cfg.out / "wind_histogram.png")
    for k, v in stats.as_rows():
        print(f"{k}={v:.4f}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    fleet, demand, wind, curve = _load_inputs(cfg)
    counts: dict[str, int] = {}
    for g in fleet:
        counts[classify_participation(g).value] = counts.get(classify_participation(g).value, 0) + 1
    techs = sorted({g.tech.value for g in fleet})
    print(f"fleet {cfg.fleet}: {len(fleet)} units, {fleet.capacity:g} MW, technologies {','.join(techs)}")
    print("participation " + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    print(f"demand {cfg.demand}: {len(demand)} days, peak {max(max(d.demand) for d in demand):g} MW")
    if wind is not None:
        print(f"wind {cfg.wind}: {len(wind)} days")
    print(f"curve: rated {curve.rated_power:g} MW, cut-in {curve.cut_in:g} m/s, cut-out {curve.cut_out:g} m/s")
    short = [d.day_label for d in demand if max(d.demand) > fleet.capacity]
    if short:
        print(f"error: demand exceeds fleet capacity on {', '.join(short)}", file=sys.stderr)
        return EXIT_DATA
    print("ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="windmarket", description="Day-ahead unit commitment and spot-price studies under wind growth.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override its entries")
    common.add_argument("--fleet", help="generator CSV or JSON (default: bundled desk fleet)")
    common.add_argument("--demand", help="day_label,h00..h23 demand CSV")
    common.add_argument("--wind", help="day_label,h00..h23 wind-speed CSV")
    common.add_argument("--curve", help="turbine power-curve CSV")
    common.add_argument("--out", help="output directory (default: out)")
    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--time-limit", dest="time_limit", type=float, help="seconds per solve (default 60)")
    solver.add_argument("--mip-gap", dest="mip_gap", type=float, help="relative gap to stop at (default 1e-4)")
    solver.add_argument("--uplift-convention", dest="uplift_convention", choices=[c.value for c in UpliftConvention])
    solver.add_argument("--curtailment", action="store_true", default=None, help="allow wind curtailment")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common, solver], help="solve, price and settle one day")
    p.add_argument("--day", help="day label or 1-based index (default: first day)")
    p.add_argument("--capacity", type=float, help="installed wind capacity in MW (default 0)")
    p = sub.add_parser("sweep", parents=[common, solver], help="solve every day across a capacity grid")
    p.add_argument("--grid", help="comma list or start:stop:step in MW (default 0:1000:50 plus 505.5)")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--days", help="comma list of day labels or 1-based indices (default: all)")
    p.add_argument("--track", help="comma list of unit ids to trace (default: all gas units)")
    p = sub.add_parser("windstats", parents=[common], help="wind-speed summary and histogram")
    p.add_argument("--bin-width", dest="bin_width", type=float, help="histogram bin width in m/s (default 1)")
    sub.add_parser("validate", parents=[common], help="load and check all input files")
    return parser


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "windstats": cmd_windstats, "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FleetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ScheduleError as exc:
        print(f"error: solver output rejected: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
