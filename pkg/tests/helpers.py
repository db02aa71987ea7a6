"""Small builders shared by the test modules."""

from __future__ import annotations

import numpy as np

from windmarket.fleet import DemandProfile, Fleet, Generator, Tech
from windmarket.uc import UCInstance, UCOptions
from windmarket.wind import WindPowerSeries


def gen(gid="g1", tech=Tech.GAS, p_max=100.0, p_min=0.0, ramp=None, cost=10.0, startup=0.0, on=False, p0=0.0, ramp_down=None):
    ramp = p_max if ramp is None else ramp
    return Generator(gid, f"unit {gid}", tech, p_max, p_min, ramp, ramp if ramp_down is None else ramp_down, cost, startup, on, p0)


def instance(gens, demand, wind=None, options=UCOptions()) -> UCInstance:
    """UC instance with an arbitrary horizon (files are always 24 h; tests need fewer)."""
    demand = tuple(float(d) for d in demand)
    T = len(demand)
    w = tuple(float(v) for v in (wind if wind is not None else np.zeros(T)))
    return UCInstance(Fleet(tuple(gens)), DemandProfile("test", demand, horizon=T), WindPowerSeries(0.0, w), options)


def random_uc(rng: np.random.Generator, max_gens=4, max_hours=6, max_cells=10) -> UCInstance:
    """Random small commitment instance; may be infeasible on purpose."""
    while True:
        G = int(rng.integers(1, max_gens + 1))
        T = int(rng.integers(1, max_hours + 1))
        if G * T <= max_cells:
            break
    gens = []
    for i in range(G):
        p_max = float(rng.integers(20, 101))
        p_min = float(rng.choice([0.0, round(p_max * rng.uniform(0.1, 0.4))]))
        ramp = float(round(p_max * rng.uniform(0.4, 1.0)))
        on = bool(rng.random() < 0.4)
        p0 = float(round(rng.uniform(p_min, p_max))) if on else 0.0
        gens.append(gen(f"u{i}", p_max=p_max, p_min=p_min, ramp=ramp, cost=float(rng.integers(5, 60)),
                        startup=float(rng.choice([0.0, rng.integers(50, 800)])), on=on, p0=p0))
    cap = sum(g.p_max for g in gens)
    demand = np.round(rng.uniform(0.1, 0.6, T) * cap, 1)
    return instance(gens, demand)
