"""Wind resource statistics and speed-to-power conversion."""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fleet import HORIZON, ParseError, ValidationError, _read_day_table


@dataclass(frozen=True)
class WindSpeedSeries:
    site: str
    speeds: tuple[float, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        speeds = tuple(float(v) for v in self.speeds)
        for i, v in enumerate(speeds):
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{self.site}: wind speed at index {i} must be finite and >= 0 (got {v})")
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.speeds)


@dataclass(frozen=True)
class WindStats:
    mean: float
    median: float
    std_dev: float
    min: float
    max: float

    def as_rows(self) -> list[tuple[str, float]]:
        return [
            ("mean", self.mean),
            ("median", self.median),
            ("std_dev", self.std_dev),
            ("min", self.min),
            ("max", self.max),
        ]


@dataclass(frozen=True)
class TurbinePowerCurve:
    rated_power: float
    cut_in: float
    cut_out: float
    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(s), float(p)) for s, p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValidationError("power curve needs at least one point")
        speeds = [s for s, _ in pts]
        if any(b <= a for a, b in zip(speeds, speeds[1:])):
            raise ValidationError("power curve points must be strictly increasing in speed")
        if not 0 <= self.cut_in < self.cut_out:
            raise ValidationError("power curve needs 0 <= cut_in < cut_out")
        for s, p in pts:
            if not 0 <= p <= self.rated_power + 1e-12:
                raise ValidationError(f"power {p} at {s} m/s outside [0, rated_power]")
            if (s < self.cut_in or s >= self.cut_out) and p != 0:
                raise ValidationError(f"power must be 0 outside [cut_in, cut_out) (point at {s} m/s)")


@dataclass(frozen=True)
class WindPowerSeries:
    installed_capacity: float
    power: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "power", tuple(float(v) for v in self.power))


# 12-point piecewise-linear approximation of a 2 MW, IEC IIA turbine
# (V90-class); cut-in 4 m/s, rated plateau from 13 m/s, cut-out 25 m/s.
DEFAULT_CURVE = TurbinePowerCurve(
    rated_power=2.0,
    cut_in=4.0,
    cut_out=25.0,
    points=(
        (4.0, 0.0),
        (5.0, 0.091),
        (6.0, 0.200),
        (7.0, 0.362),
        (8.0, 0.588),
        (9.0, 0.889),
        (10.0, 1.256),
        (11.0, 1.637),
        (12.0, 1.904),
        (13.0, 2.0),
        (20.0, 2.0),
        (24.99, 2.0),
    ),
)


def summarize(series: WindSpeedSeries) -> WindStats:
    if not series.speeds:
        raise ValueError("cannot summarize an empty wind series")
    v = series.speeds
    std = statistics.stdev(v) if len(v) > 1 else 0.0
    return WindStats(statistics.fmean(v), statistics.median(v), std, min(v), max(v))


def histogram(series: WindSpeedSeries, bin_width: float) -> list[tuple[float, int]]:
    """Counts per bin ``[k*w, (k+1)*w)`` covering ``[0, max]``; the last bin is closed."""
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    if not series.speeds:
        return []
    vmax = max(series.speeds)
    nbins = max(1, math.ceil(vmax / bin_width))
    # a maximum that sits on an edge belongs to the last, right-closed bin
    counts = [0] * nbins
    for v in series.speeds:
        k = min(int(v // bin_width), nbins - 1)
        counts[k] += 1
    return [(k * bin_width, c) for k, c in enumerate(counts)]


def turbine_power(curve: TurbinePowerCurve, v: float) -> float:
    if v < 0:
        raise ValueError("wind speed must be non-negative")
    if v < curve.cut_in or v >= curve.cut_out:
        return 0.0
    speeds = [s for s, _ in curve.points]
    powers = [p for _, p in curve.points]
    p = float(np.interp(v, speeds, powers))
    return min(max(p, 0.0), curve.rated_power)


def farm_power(
    curve: TurbinePowerCurve,
    series: WindSpeedSeries,
    installed_capacity: float,
    *,
    integer_turbines: bool = False,
) -> WindPowerSeries:
    """Farm output per hour for ``installed_capacity`` MW of identical turbines.

    Static estimate: every turbine is available. With ``integer_turbines`` the
    capacity is rounded down to whole machines.
    """
    if installed_capacity < 0:
        raise ValueError("installed capacity must be non-negative")
    if curve.rated_power <= 0:
        raise ValueError("power curve has zero rated power")
    if len(series) != HORIZON:
        raise ValueError(f"wind series must have {HORIZON} hourly values (got {len(series)})")
    n_turbines = installed_capacity / curve.rated_power
    if integer_turbines:
        n_turbines = math.floor(n_turbines + 1e-9)
    power = tuple(n_turbines * turbine_power(curve, v) for v in series.speeds)
    return WindPowerSeries(installed_capacity, power)


def load_wind(path: str | Path) -> list[WindSpeedSeries]:
    """One 24-hour series per day row of a ``day_label,h00..h23`` file."""
    path = Path(path)
    out: list[WindSpeedSeries] = []
    seen: set[str] = set()
    for line_no, (label, values) in enumerate(_read_day_table(path, "wind"), start=2):
        if len(values) != HORIZON:
            raise ValidationError(f"{path}, line {line_no}: horizon must be {HORIZON} (got {len(values)})")
        if label in seen:
            raise ValidationError(f"{path}, line {line_no}: duplicate day label {label!r}")
        seen.add(label)
        try:
            speeds = [float(v) for v in values]
        except ValueError as exc:
            raise ParseError(f"{path}, line {line_no}: {exc}") from None
        out.append(WindSpeedSeries(label, tuple(speeds), tuple(f"{label}/h{h:02d}" for h in range(HORIZON))))
    return out


def concat(series: list[WindSpeedSeries], site: str = "site") -> WindSpeedSeries:
    return WindSpeedSeries(site, tuple(v for s in series for v in s.speeds), tuple(l for s in series for l in s.labels))


def write_wind(series: list[WindSpeedSeries], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day_label", *(f"h{h:02d}" for h in range(HORIZON))])
        for s in series:
            w.writerow([s.site, *(f"{v:.2f}" for v in s.speeds)])


def load_curve(path: str | Path) -> TurbinePowerCurve:
    """Read a power curve file.

    Header fields ``rated_power_mw``, ``cut_in_ms`` and ``cut_out_ms`` are given
    as ``# key = value`` comment lines, followed by ``speed_ms,power_mw`` rows.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read curve file {path}: {exc.strerror or exc}") from None
    header: dict[str, float] = {}
    rows: list[str] = []
    for ln in text.splitlines():
        s = ln.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s.lstrip("#").strip()
            if "=" in body:
                k, v = body.split("=", 1)
                try:
                    header[k.strip()] = float(v)
                except ValueError:
                    raise ParseError(f"{path}: bad header value for {k.strip()!r}") from None
            continue
        rows.append(s)
    for key in ("rated_power_mw", "cut_in_ms", "cut_out_ms"):
        if key not in header:
            raise ParseError(f"{path}: missing header field {key}")
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or "speed_ms" not in reader.fieldnames or "power_mw" not in reader.fieldnames:
        raise ParseError(f"{path}: columns speed_ms,power_mw required")
    pts = []
    for i, r in enumerate(reader, start=1):
        try:
            pts.append((float(r["speed_ms"]), float(r["power_mw"])))
        except (TypeError, ValueError):
            raise ParseError(f"{path}, data row {i}: non-numeric value") from None
    return TurbinePowerCurve(header["rated_power_mw"], header["cut_in_ms"], header["cut_out_ms"], tuple(pts))


def write_curve(curve: TurbinePowerCurve, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# rated_power_mw = {curve.rated_power!r}\n")
        fh.write(f"# cut_in_ms = {curve.cut_in!r}\n")
        fh.write(f"# cut_out_ms = {curve.cut_out!r}\n")
        fh.write("speed_ms,power_mw\n")
        for s, p in curve.points:
            fh.write(f"{s!r},{p!r}\n")
