import numpy as np
import pytest

from helpers import gen, instance, random_uc
from oracles import enumerate_uc
from windmarket.milp import ucsolve
from windmarket.milp.model import SolveResult, Status
from windmarket.milp.ucsolve import ScheduleError, solve_uc
from windmarket.uc import check_feasibility, evaluate_cost


def test_single_cheap_unit_follows_demand():
    demand = [40, 70, 55, 90]
    inst = instance([gen(cost=12, p_max=100, on=True, p0=40)], demand)
    r, s = solve_uc(inst)
    assert r.status is Status.OPTIMAL
    np.testing.assert_allclose(s.p[0], demand, atol=1e-7)
    assert r.objective == pytest.approx(12 * sum(demand))


def test_base_and_peaker():
    base = gen("base", p_max=100, cost=10, on=True, p0=50)
    peak = gen("peak", p_max=100, cost=50, startup=200)
    inst = instance([base, peak], [50, 150, 50])
    r, s = solve_uc(inst)
    # base carries 50/100/50, the peaker starts once for 50 MWh
    assert r.objective == pytest.approx(10 * 200 + 50 * 50 + 200)
    assert r.objective == pytest.approx(enumerate_uc(inst))
    np.testing.assert_allclose(s.p[1], [0, 50, 0], atol=1e-7)
    # with p_min = 0 the start may come earlier at equal cost; only the count is fixed
    assert s.startup[1].sum() == 1


def test_infeasible_demand_beyond_fleet():
    r, s = solve_uc(instance([gen(p_max=10)], [5, 50]))
    assert r.status is Status.INFEASIBLE and s is None


@pytest.mark.parametrize("seed", range(10))
def test_reduced_and_full_formulations_agree(seed):
    inst = random_uc(np.random.default_rng(400 + seed), max_cells=10)
    a, sa = solve_uc(inst)
    b, sb = solve_uc(inst, reduce_free_units=False)
    assert a.status == b.status
    if sa is not None:
        assert a.objective == pytest.approx(b.objective, rel=1e-7, abs=1e-7)
        assert check_feasibility(inst, sa) == [] and check_feasibility(inst, sb) == []
        assert evaluate_cost(inst, sa) == pytest.approx(a.objective, rel=1e-9, abs=1e-6)


def test_fractional_output_is_rejected(monkeypatch):
    inst = instance([gen(startup=10)], [50])

    def fake(mip, limits):
        x = np.array([50.0, 0.5, 0.5])
        return SolveResult(Status.OPTIMAL, x, 505.0, 505.0, 0.0)

    monkeypatch.setattr(ucsolve, "branch_and_bound", fake)
    with pytest.raises(ScheduleError, match="fractional"):
        solve_uc(inst)


def test_infeasible_rounded_schedule_is_rejected(monkeypatch):
    inst = instance([gen(startup=10)], [50])

    def fake(mip, limits):
        # output while reported off
        return SolveResult(Status.OPTIMAL, np.array([50.0, 0.0, 0.0]), 500.0, 500.0, 0.0)

    monkeypatch.setattr(ucsolve, "branch_and_bound", fake)
    with pytest.raises(ScheduleError, match="bounds"):
        solve_uc(inst)
