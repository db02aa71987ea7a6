import numpy as np
import pytest
import scipy.sparse as sp

from helpers import random_uc
from oracles import enumerate_uc
from windmarket.milp.bnb import Limits, _most_fractional, branch_and_bound
from windmarket.milp.model import LinearProgram, MixedIntegerProgram, Status
from windmarket.uc import to_milp


def mip(c, A, senses, b, ub=None, binaries=None):
    c = np.asarray(c, float)
    n = len(c)
    lp = LinearProgram(c, sp.csr_matrix(np.asarray(A, float).reshape(-1, n)), tuple(senses), np.asarray(b, float),
                       np.zeros(n), np.ones(n) if ub is None else np.asarray(ub, float))
    return MixedIntegerProgram(lp, np.arange(n) if binaries is None else np.asarray(binaries))


def test_two_item_knapsack():
    # maximise 3a + 2b subject to a + b <= 1
    r = branch_and_bound(mip([-3, -2], [[1, 1]], ["<="], [1]))
    assert r.status is Status.OPTIMAL
    assert -r.objective == pytest.approx(3) and list(np.round(r.x)) == [1, 0]


def test_fractional_relaxation_needs_branching():
    # 0/1 knapsack whose LP optimum is fractional: values 10,13,7 weights 4,6,3 capacity 8
    r = branch_and_bound(mip([-10, -13, -7], [[4, 6, 3]], ["<="], [8]))
    assert -r.objective == pytest.approx(17)  # items 1 and 3
    assert r.nodes > 1


def test_integer_infeasible_but_lp_feasible():
    r = branch_and_bound(mip([1], [[1], [1]], [">=", "<="], [0.4, 0.6]))
    assert r.status is Status.INFEASIBLE and r.x is None


def test_node_limit():
    r = branch_and_bound(mip([-10, -13, -7], [[4, 6, 3]], ["<="], [8]), Limits(node_limit=1))
    assert r.status is Status.NODE_LIMIT


def test_limits_validation():
    with pytest.raises(ValueError):
        Limits(mip_gap=-1)
    with pytest.raises(ValueError):
        Limits(time_limit=0)


def test_defaults():
    assert Limits().mip_gap == 1e-4 and Limits().time_limit == 60


@pytest.mark.parametrize(
    "values, expected",
    [([0.0, 1.0], -1), ([0.5, 0.5], 0), ([0.3, 0.6], 1), ([0.9, 0.1], 0), ([1 - 1e-7, 0.0], -1)],
)
def test_branching_choice(values, expected):
    assert _most_fractional(np.array(values)) == expected


@pytest.mark.parametrize("seed", range(12))
def test_small_uc_matches_enumeration(seed):
    inst = random_uc(np.random.default_rng(seed), max_cells=8)
    expect = enumerate_uc(inst)
    r = branch_and_bound(to_milp(inst))
    if expect is None:
        assert r.status is Status.INFEASIBLE
    else:
        assert r.status is Status.OPTIMAL
        assert r.objective == pytest.approx(expect, rel=1e-6, abs=1e-6)


@pytest.mark.parametrize("seed", range(6))
def test_best_first_only_gives_same_optimum(seed):
    inst = random_uc(np.random.default_rng(50 + seed), max_cells=10)
    a = branch_and_bound(to_milp(inst))
    b = branch_and_bound(to_milp(inst), dive_until_incumbent=False)
    assert a.status == b.status
    if a.x is not None:
        assert a.objective == pytest.approx(b.objective, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_progress_is_monotone(seed):
    inst = random_uc(np.random.default_rng(200 + seed), max_cells=10)
    r = branch_and_bound(to_milp(inst))
    inc = [h[1] for h in r.history]
    bnd = [h[2] for h in r.history]
    assert all(b <= a for a, b in zip(inc, inc[1:]))
    assert all(b >= a for a, b in zip(bnd, bnd[1:]))


def test_deterministic():
    inst = random_uc(np.random.default_rng(3), max_cells=10)
    a, b = branch_and_bound(to_milp(inst)), branch_and_bound(to_milp(inst))
    assert a.nodes == b.nodes and a.history == b.history
    assert np.array_equal(a.x, b.x)
