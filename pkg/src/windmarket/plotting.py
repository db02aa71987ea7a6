"""Matplotlib figures for sweep and wind reports (file output only)."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .analytics import SweepResult, avg_daily_cost, mean_spot, share_by_type, share_change, unit_trajectory


def _new(figsize=(6.4, 4.0)):
    fig = Figure(figsize=figsize)
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot(1, 1, 1)


def _save(fig: Figure, path: Path) -> Path:
    fig.tight_layout()
    # no software/version stamp so the bytes only depend on the data
    fig.savefig(path, dpi=100, metadata={"Software": None})
    return path


def plot_avg_cost(sweep: SweepResult, path: Path) -> Path:
    stats = avg_daily_cost(sweep)
    caps = np.array(list(stats))
    fig, ax = _new()
    ax.fill_between(caps, [s.min for s in stats.values()], [s.max for s in stats.values()], alpha=0.25, label="min-max over days")
    ax.plot(caps, [s.mean for s in stats.values()], "-o", ms=3, label="mean")
    ax.set_xlabel("installed wind capacity [MW]")
    ax.set_ylabel("average generation cost [COP/MWh]")
    ax.legend()
    return _save(fig, path)


def plot_spot(sweep: SweepResult, path: Path, capacities=None) -> Path:
    spots = mean_spot(sweep)
    if capacities is None:
        capacities = [c for c in (0.0, 505.5, 1000.0) if c in spots] or list(spots)
    fig, ax = _new()
    for cap in capacities:
        if cap in spots:
            ax.step(np.arange(len(spots[cap])), spots[cap], where="post", label=f"{cap:g} MW")
    ax.set_xlabel("hour")
    ax.set_ylabel("mean spot price [COP/MWh]")
    ax.legend()
    return _save(fig, path)


def plot_shares(sweep: SweepResult, path: Path) -> Path:
    shares = share_by_type(sweep)
    caps = np.array(list(shares))
    fig, ax = _new()
    bottom = np.zeros(len(caps))
    techs = next(iter(shares.values())).mean.keys() if shares else []
    for tech in techs:
        vals = np.array([100 * s.mean[tech] for s in shares.values()])
        if not vals.any():
            continue
        ax.fill_between(caps, bottom, bottom + vals, label=tech, step=None)
        bottom = bottom + vals
    ax.set_xlabel("installed wind capacity [MW]")
    ax.set_ylabel("share of daily energy [%]")
    ax.set_ylim(0, 100)
    ax.legend(loc="lower left")
    return _save(fig, path)


def plot_share_change(sweep: SweepResult, path: Path) -> Path:
    change = share_change(sweep)
    caps = np.array(list(change))
    fig, ax = _new()
    techs = next(iter(change.values())).keys() if change else []
    for tech in techs:
        vals = np.array([100 * v[tech] for v in change.values()])
        if np.any(vals) or tech == "Wind":
            ax.plot(caps, vals, "-o", ms=3, label=tech)
    ax.axhline(0.0, color="black", lw=0.5)
    ax.set_xlabel("installed wind capacity [MW]")
    ax.set_ylabel("share change vs first grid point [pp]")
    ax.legend()
    return _save(fig, path)


def plot_unit(sweep: SweepResult, generator_id: str, path: Path) -> Path:
    traj = unit_trajectory(sweep, generator_id)
    caps = [p.capacity for p in traj]
    fig, ax = _new()
    ax.plot(caps, [p.hours for p in traj], "-o", ms=3, color="tab:blue")
    ax.set_xlabel("installed wind capacity [MW]")
    ax.set_ylabel("mean operating hours per day", color="tab:blue")
    ax2 = ax.twinx()
    rel = [np.nan if p.relative_revenue is None else 100 * p.relative_revenue for p in traj]
    ax2.plot(caps, rel, "-s", ms=3, color="tab:red")
    ax2.set_ylabel("net revenue vs first grid point [%]", color="tab:red")
    ax.set_title(f"unit {generator_id}")
    return _save(fig, path)


def plot_histogram(bins: list[tuple[float, int]], width: float, path: Path) -> Path:
    fig, ax = _new()
    if bins:
        ax.bar([b for b, _ in bins], [n for _, n in bins], width=width, align="edge", edgecolor="black")
    ax.set_xlabel("wind speed [m/s]")
    ax.set_ylabel("hours")
    return _save(fig, path)


def sweep_figures(sweep: SweepResult, out: str | Path, track=()) -> list[Path]:
    out = Path(out)
    if not any(c.ok for c in sweep.cells):
        return []
    paths = [
        plot_avg_cost(sweep, out / "avg_daily_cost.png"),
        plot_spot(sweep, out / "spot_price.png"),
        plot_shares(sweep, out / "share_by_type.png"),
        plot_share_change(sweep, out / "share_change.png"),
    ]
    for gid in track:
        paths.append(plot_unit(sweep, gid, out / f"unit_{gid}.png"))
    return paths
