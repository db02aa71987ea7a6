import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import gen, instance, random_uc
from windmarket.fleet import Tech
from windmarket.milp.ucsolve import solve_uc
from windmarket.pricing import (
    PriceReport,
    UpliftConvention,
    dual_prices,
    marginal_prices,
    price_day,
    settle,
    spot_price,
    uplift,
    write_prices_csv,
    write_settlement_csv,
)
from windmarket.uc import UCOptions, UCSchedule


def schedule(p, on=None, su=None, curt=None, init_on=None):
    p = np.asarray(p, float)
    on = (p > 0).astype(float) if on is None else np.asarray(on, float)
    if su is None:
        prev = np.column_stack([np.zeros(len(p)) if init_on is None else np.asarray(init_on, float), on[:, :-1]])
        su = np.maximum(on - prev, 0.0)
    su = np.asarray(su, float)
    return UCSchedule(p, on, su, 0.0, np.zeros(p.shape[1]) if curt is None else np.asarray(curt, float))


def toy():
    """Hydro base plus a gas unit that starts once for the middle hour."""
    hydro = gen("hydro", tech=Tech.HYDRO, cost=10, on=True, p0=80)
    gas = gen("gas", cost=50, startup=1000)
    inst = instance([hydro, gas], [80, 150, 80])
    s = schedule([[80, 100, 80], [0, 50, 0]], su=[[0, 0, 0], [0, 1, 0]])
    return inst, s


def test_mpo_is_costliest_dispatched_unit():
    inst = instance([gen("a", cost=100), gen("b", cost=200), gen("c", cost=999)], [30])
    mpo, empty = marginal_prices(inst, schedule([[10], [20], [0]]))
    assert mpo.tolist() == [200] and empty == ()


def test_two_unit_toy_mpo():
    inst = instance([gen("a", cost=50), gen("b", cost=10)], [30])
    assert marginal_prices(inst, schedule([[10], [20]]))[0].tolist() == [50]


def test_all_wind_hour_prices_at_zero():
    inst = instance([gen(cost=30)], [20, 20], wind=[5, 25], options=UCOptions(allow_wind_curtailment=True))
    s = schedule([[15, 0]], curt=[0, 5])
    mpo, empty = marginal_prices(inst, s)
    assert mpo.tolist() == [30, 0] and empty == (1,)
    assert price_day(inst, s).all_wind_hours == (1,)


def test_infeasible_schedule_is_refused():
    inst = instance([gen()], [30])
    with pytest.raises(ValueError, match="infeasible"):
        marginal_prices(inst, schedule([[10]]))


def test_uplift_zero_without_startup_costs():
    inst = instance([gen("a", cost=10, on=True, p0=20), gen("b", cost=20)], [20, 40])
    s = schedule([[20, 30], [0, 10]], su=[[0, 0], [0, 1]])
    mpo, _ = marginal_prices(inst, s)
    assert uplift(inst, s, mpo) == 0.0


def test_uplift_single_unit_make_whole():
    inst = instance([gen(cost=10, startup=1000)], [50, 50])
    s = schedule([[50, 50]], su=[[1, 0]])
    mpo = np.array([10.0, 10.0])
    assert uplift(inst, s, mpo) == pytest.approx(10.0)
    assert uplift(inst, s, mpo, "as-printed") == 0.0


def test_spot_is_mpo_plus_uplift():
    assert spot_price(np.full(24, 100.0), 10.0).tolist() == [110.0] * 24
    assert spot_price(np.array([1.0, 2.0]), 0.0).tolist() == [1.0, 2.0]
    with pytest.raises(ValueError):
        spot_price(np.zeros(2), -1.0)
    with pytest.raises(ValueError):
        PriceReport(np.zeros(2), -1.0, np.zeros(2))


def test_toy_settlement():
    inst, s = toy()
    prices = price_day(inst, s)
    assert prices.mpo.tolist() == [10, 50, 10]
    up = 1000 / 310
    assert prices.uplift == pytest.approx(up)
    rep = settle(inst, s, prices)
    hydro, gas = rep.get("hydro"), rep.get("gas")
    assert not hydro.keeps_uplift and hydro.reimbursement == pytest.approx(up * 260)
    assert gas.keeps_uplift and gas.reimbursement == 0.0
    assert gas.c_plant == 3500 and gas.c_mpo == 2500
    assert gas.net_revenue == pytest.approx(2500 + 50 * up)
    assert hydro.net_revenue == pytest.approx(hydro.c_mpo)


def test_as_printed_settlement_mirrors_keepers():
    inst, s = toy()
    prices = price_day(inst, s, UpliftConvention.AS_PRINTED)
    # hydro's surplus (6600 - 2600) is what the printed form spreads
    assert prices.uplift == pytest.approx(4000 / 310)
    rep = settle(inst, s, prices)
    assert rep.get("hydro").keeps_uplift and not rep.get("gas").keeps_uplift


def test_single_unit_is_made_whole():
    inst = instance([gen(cost=10, startup=1000)], [40, 60])
    s = schedule([[40, 60]], su=[[1, 0]])
    prices = price_day(inst, s)
    rep = settle(inst, s, prices)
    u = rep.units[0]
    assert u.net_revenue == pytest.approx(u.c_plant)
    assert rep.demand_payment == pytest.approx(float(prices.spot @ np.array([40, 60])))


def test_idle_unit_settles_to_zero():
    inst = instance([gen("a", cost=10, on=True, p0=20), gen("b", cost=20)], [20])
    s = schedule([[20], [0]], init_on=[1, 0])
    rep = settle(inst, s, price_day(inst, s))
    b = rep.get("b")
    assert (b.energy_revenue, b.c_plant, b.c_mpo, b.reimbursement, b.net_revenue) == (0, 0, 0, 0, 0)


def test_uplift_is_permutation_invariant():
    inst, s = toy()
    flipped = instance(list(reversed(inst.fleet.generators)), inst.demand.demand)
    fs = schedule(s.p[::-1], s.on[::-1], s.startup[::-1])
    assert price_day(flipped, fs).uplift == pytest.approx(price_day(inst, s).uplift, rel=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(list(UpliftConvention)))
def test_money_balances_on_solved_instances(seed, convention):
    inst = random_uc(np.random.default_rng(seed), max_cells=10)
    r, s = solve_uc(inst)
    if s is None:
        return
    prices = price_day(inst, s, convention)
    assert np.all(prices.spot >= prices.mpo)
    assert np.ptp(prices.spot - prices.mpo) <= 1e-9 * max(1.0, prices.uplift)
    gross, net = settle(inst, s, prices).conservation_residuals()
    assert gross <= 1e-6 and net <= 1e-6


def test_wind_is_paid_and_settled():
    from windmarket.uc import UCInstance
    from windmarket.wind import WindPowerSeries

    base = instance([gen(cost=20, on=True, p0=30)], [40, 40])
    inst = UCInstance(base.fleet, base.demand, WindPowerSeries(10, (10.0, 10.0)))
    s = schedule([[30, 30]], init_on=[1])
    rep = settle(inst, s, price_day(inst, s))
    assert rep.get("wind").energy_revenue == pytest.approx(400)
    assert max(rep.conservation_residuals()) <= 1e-12


def test_experimental_dual_prices():
    inst = instance([gen("cheap", cost=10, p_max=50, on=True, p0=50), gen("dear", cost=40, on=True, p0=20)], [70, 80])
    r, s = solve_uc(inst)
    np.testing.assert_allclose(dual_prices(inst, s), [40, 40], atol=1e-7)


def test_report_files(tmp_path):
    inst, s = toy()
    prices = price_day(inst, s)
    write_prices_csv(prices, tmp_path / "p.csv")
    write_settlement_csv(settle(inst, s, prices), tmp_path / "s.csv")
    rows = list(csv.DictReader(open(tmp_path / "p.csv")))
    assert list(rows[0]) == ["hour", "mpo", "spot"] and len(rows) == 3
    rows = list(csv.DictReader(open(tmp_path / "s.csv")))
    assert list(rows[0]) == ["generator", "energy_revenue", "c_plant", "c_mpo", "reimbursement", "net_revenue"]
    assert "," not in rows[0]["energy_revenue"]
