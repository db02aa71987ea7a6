"""Deterministic synthetic demand and wind-speed days.

The original demand and wind records are not bundled; these generators
produce look-alike typical days from a seed so runs stay reproducible.
"""

from __future__ import annotations

import numpy as np

from .fleet import HORIZON, DemandProfile
from .wind import WindSpeedSeries

# normalized hourly load shape of a weekday with an evening peak (peak = 1)
LOAD_SHAPE = np.array(
    [0.70, 0.67, 0.66, 0.65, 0.66, 0.70, 0.75, 0.80, 0.86, 0.90, 0.93, 0.95,
     0.94, 0.93, 0.93, 0.92, 0.91, 0.92, 0.97, 1.00, 0.98, 0.92, 0.84, 0.76]
)


def demand_days(n_days: int, peak_mw: float, seed: int, spread: float = 0.06, prefix: str = "day") -> list[DemandProfile]:
    """``n_days`` load profiles whose peak varies by about ``spread`` around ``peak_mw``."""
    rng = np.random.default_rng(seed)
    days = []
    for d in range(n_days):
        level = peak_mw * (1.0 + spread * rng.uniform(-1.0, 1.0))
        wobble = 1.0 + 0.015 * rng.standard_normal(HORIZON)
        values = np.round(level * LOAD_SHAPE * wobble, 1)
        days.append(DemandProfile(f"{prefix}{d + 1:02d}", tuple(values.tolist())))
    return days


def wind_days(
    n_days: int,
    seed: int,
    mean: float = 8.5,
    std: float = 2.2,
    rho: float = 0.85,
    prefix: str = "day",
) -> list[WindSpeedSeries]:
    """Hourly speeds from an AR(1) process around a mild diurnal cycle, clipped to [0.25, 14]."""
    rng = np.random.default_rng(seed)
    hours = np.arange(HORIZON)
    diurnal = 0.8 * np.sin(2 * np.pi * (hours - 9) / HORIZON)
    innov = std * np.sqrt(1.0 - rho**2)
    out = []
    state = 0.0
    for d in range(n_days):
        day_bias = 0.6 * std * rng.standard_normal()
        speeds = np.empty(HORIZON)
        for h in range(HORIZON):
            state = rho * state + innov * rng.standard_normal()
            speeds[h] = mean + day_bias * 0.5 + diurnal[h] + state
        speeds = np.round(np.clip(speeds, 0.25, 14.0), 2)
        out.append(WindSpeedSeries(f"{prefix}{d + 1:02d}", tuple(speeds.tolist())))
    return out
