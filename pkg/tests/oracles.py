"""Independent reference solvers used only by the tests.

``tableau_solve`` is a dense two-phase tableau simplex with Bland's rule,
written separately from the package's revised simplex. ``enumerate_uc``
tries every commitment pattern and solves the remaining dispatch LP with
SciPy's HiGHS, so it shares no code with the branch-and-bound path.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from windmarket.milp.model import EQ, GE, LE, LinearProgram


def _standard_form(lp: LinearProgram):
    """min c'z, Az = b, z >= 0 with b >= 0. Returns (c, A, b, objective offset)."""
    A0 = lp.A.toarray()
    m, n = A0.shape
    lb, ub = lp.lb, lp.ub
    if not np.all(np.isfinite(lb)):
        raise ValueError("oracle needs finite lower bounds")
    # x = lb + z
    rhs = lp.b - A0 @ lb
    rows = [(A0[i], lp.senses[i], rhs[i]) for i in range(m)]
    for j in range(n):
        if np.isfinite(ub[j]):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append((e, LE, ub[j] - lb[j]))
    n_slack = sum(1 for _, s, _ in rows if s != EQ)
    A = np.zeros((len(rows), n + n_slack))
    b = np.zeros(len(rows))
    k = n
    for i, (a, s, r) in enumerate(rows):
        A[i, :n] = a
        if s == LE:
            A[i, k] = 1.0
            k += 1
        elif s == GE:
            A[i, k] = -1.0
            k += 1
        b[i] = r
        if b[i] < 0:
            A[i] *= -1
            b[i] *= -1
    c = np.concatenate([lp.c, np.zeros(n_slack)])
    return c, A, b, float(lp.c @ lb)


def _pivot(T: np.ndarray, r: int, k: int) -> None:
    T[r] /= T[r, k]
    for i in range(T.shape[0]):
        if i != r and T[i, k] != 0.0:
            T[i] -= T[i, k] * T[r]


def _run(T: np.ndarray, basis: list[int], allowed: int, tol: float = 1e-10) -> str:
    """Minimise with the objective row last; Bland's rule on columns < allowed."""
    m = T.shape[0] - 1
    for _ in range(10000):
        cost = T[-1, :allowed]
        cand = np.flatnonzero(cost < -tol)
        if cand.size == 0:
            return "optimal"
        k = int(cand[0])
        col = T[:m, k]
        ratios = [(T[i, -1] / col[i], basis[i], i) for i in range(m) if col[i] > tol]
        if not ratios:
            return "unbounded"
        _, _, r = min(ratios)
        _pivot(T, r, k)
        basis[r] = k
    return "iteration limit"


def tableau_solve(lp: LinearProgram) -> tuple[str, float | None]:
    """(status, objective) of ``lp`` using a dense two-phase tableau."""
    c, A, b, offset = _standard_form(lp)
    m, n = A.shape
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    # phase 1 objective: sum of artificials, expressed in the nonbasic columns
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _run(T, basis, n + m)
    if -T[-1, -1] > 1e-8 * (1 + np.abs(b).max(initial=0)):
        return "infeasible", None
    # pivot remaining artificials out where possible
    for i in range(m):
        if basis[i] >= n:
            nz = np.flatnonzero(np.abs(T[i, :n]) > 1e-9)
            if nz.size:
                _pivot(T, i, int(nz[0]))
                basis[i] = int(nz[0])
    T[-1] = 0.0
    T[-1, :n] = c
    for i in range(m):
        if basis[i] < n and c[basis[i]] != 0:
            T[-1] -= c[basis[i]] * T[i]
    # only structural columns may enter, so artificials stay out
    status = _run(T, basis, n)
    if status != "optimal":
        return status, None
    return "optimal", float(-T[-1, -1] + offset)


def enumerate_uc(inst) -> float | None:
    """Cheapest cost over all on/off patterns, or None if no pattern is feasible."""
    gens = inst.fleet.generators
    G, T = len(gens), inst.horizon
    D = inst.net_demand - inst.wind_power
    best = None
    cp = np.array([g.energy_cost for g in gens])
    for bits in itertools.product((0, 1), repeat=G * T):
        on = np.array(bits, dtype=float).reshape(G, T)
        prev = np.column_stack([[1.0 if g.initial_on else 0.0 for g in gens], on[:, :-1]])
        startups = np.maximum(on - prev, 0.0)
        fixed = float(sum(g.startup_cost * startups[i].sum() for i, g in enumerate(gens)))
        # energy costs are non-negative, so start-up cost alone is a lower bound
        if best is not None and fixed >= best:
            continue
        # dispatch LP over p[g, t] (row-major)
        lo = (on * np.array([g.p_min for g in gens])[:, None]).ravel()
        hi = (on * np.array([g.p_max for g in gens])[:, None]).ravel()
        A_eq = np.zeros((T, G * T))
        for t in range(T):
            A_eq[t, t::T] = 1.0
        A_ub, b_ub = [], []
        for i, g in enumerate(gens):
            for t in range(T):
                row = np.zeros(G * T)
                row[i * T + t] = 1.0
                if t == 0:
                    A_ub.append(row)
                    b_ub.append(g.ramp_up + g.initial_power)
                    A_ub.append(-row)
                    b_ub.append(g.ramp_down - g.initial_power)
                else:
                    row[i * T + t - 1] = -1.0
                    A_ub.append(row)
                    b_ub.append(g.ramp_up)
                    A_ub.append(-row)
                    b_ub.append(g.ramp_down)
        res = linprog(
            np.repeat(cp, T),
            A_ub=np.array(A_ub),
            b_ub=np.array(b_ub),
            A_eq=A_eq,
            b_eq=D,
            bounds=list(zip(lo, hi)),
            method="highs",
        )
        if res.status != 0:
            continue
        total = fixed + float(res.fun)
        if best is None or total < best:
            best = total
    return best
