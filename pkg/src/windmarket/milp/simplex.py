"""Bounded-variable revised primal simplex.

Every row gets a slack column so the working basis starts as the identity.
Rows whose slack would start outside its bounds receive an artificial
column and phase 1 minimises the sum of artificials. The basis inverse is
kept as a sparse LU factor plus a product-form eta file, refactored
periodically.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import EQ, GE, LE, LinearProgram, SolveResult, Status
from .presolve import presolve

PIVOT_TOL = 1e-9
PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
REFACTOR_EVERY = 50
DEGENERATE_STREAK = 30
BIG_M = 1e4

_BASIC, _LOWER, _UPPER, _FREE, _FIXED = 0, 1, 2, 3, 4


class _Factor:
    """LU of the initial basis with product-form eta updates."""

    def __init__(self, B: sp.csc_matrix):
        self.m = B.shape[0]
        self.lu = spla.splu(B, permc_spec="COLAMD")
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, a: np.ndarray) -> np.ndarray:
        x = self.lu.solve(a)
        for r, w in self.etas:
            xr = x[r] / w[r]
            if xr != 0.0:
                x -= w * xr
            x[r] = xr
        return x

    def btran(self, c: np.ndarray) -> np.ndarray:
        v = c.copy()
        for r, w in reversed(self.etas):
            # (E^-1)^T v: only component r changes
            v[r] = (v[r] - (w @ v - w[r] * v[r])) / w[r]
        return self.lu.solve(v, trans="T")

    def update(self, r: int, w: np.ndarray) -> None:
        self.etas.append((r, w.copy()))


class _Simplex:
    def __init__(self, lp: LinearProgram, deadline: float | None, max_iter: int | None):
        self.deadline = deadline
        m, n = lp.num_rows, lp.num_vars
        self.m, self.n = m, n

        A = lp.A
        row_scale = np.asarray(abs(A).max(axis=1).todense()).ravel() if m else np.zeros(0)
        row_scale[row_scale == 0] = 1.0
        self.row_scale = row_scale
        As = sp.diags(1.0 / row_scale) @ A
        bs = lp.b / row_scale
        self.cost_scale = max(1.0, float(np.max(np.abs(lp.c), initial=0.0)))
        self.c = lp.c / self.cost_scale
        self.b = bs

        senses = np.asarray(lp.senses)
        slo = np.where(senses == GE, -np.inf, 0.0)
        sup = np.where(senses == LE, np.inf, 0.0)

        lo = np.concatenate([lp.lb, slo])
        up = np.concatenate([lp.ub, sup])
        x = np.zeros(n + m)
        state = np.zeros(n + m, dtype=np.int8)
        for j in range(n):
            if lo[j] == up[j]:
                x[j], state[j] = lo[j], _FIXED
            elif np.isfinite(lo[j]):
                x[j], state[j] = lo[j], _LOWER
            elif np.isfinite(up[j]):
                x[j], state[j] = up[j], _UPPER
            else:
                x[j], state[j] = 0.0, _FREE

        r = bs - As @ x[:n]
        art_rows, art_sign = [], []
        basis = np.empty(m, dtype=np.int64)
        for i in range(m):
            s = n + i
            if slo[i] - PRIMAL_TOL <= r[i] <= sup[i] + PRIMAL_TOL:
                x[s] = min(max(r[i], slo[i]), sup[i])
                basis[i] = s
                state[s] = _BASIC
            else:
                v = slo[i] if r[i] < slo[i] else sup[i]
                x[s] = v
                state[s] = _FIXED if slo[i] == sup[i] else (_LOWER if v == slo[i] else _UPPER)
                art_rows.append(i)
                art_sign.append(1.0 if r[i] - v > 0 else -1.0)
        k = len(art_rows)
        art_cols = np.arange(n + m, n + m + k)
        art = sp.csc_matrix((np.array(art_sign), (np.array(art_rows, dtype=np.int64), np.arange(k))), shape=(m, k))
        xa = np.abs(r[art_rows] - x[n + np.array(art_rows, dtype=np.int64)]) if k else np.zeros(0)
        for t, i in enumerate(art_rows):
            basis[i] = n + m + t

        self.M = sp.hstack([As, sp.identity(m, format="csc"), art], format="csc")
        self.MT = self.M.T.tocsr()
        self.lo = np.concatenate([lo, np.zeros(k)])
        self.up = np.concatenate([up, np.full(k, np.inf)])
        self.x = np.concatenate([x, xa])
        self.state = np.concatenate([state, np.zeros(k, dtype=np.int8)])
        self.basis = basis
        self.art_cols = art_cols
        self.N = n + m + k
        self.iterations = 0
        self.max_iter = max_iter if max_iter is not None else 50 * (self.N + m) + 1000
        self._refactor()

    # --- linear algebra helpers -------------------------------------------------

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        s, e = self.M.indptr[j], self.M.indptr[j + 1]
        col[self.M.indices[s:e]] = self.M.data[s:e]
        return col

    def _refactor(self) -> None:
        B = self.M[:, self.basis].tocsc()
        self.factor = _Factor(B)
        nb = self.state != _BASIC
        rhs = self.b - self.M[:, nb] @ self.x[nb]
        self.x[self.basis] = self.factor.ftran(rhs)

    # --- main loop --------------------------------------------------------------

    def run_phase(self, cost: np.ndarray, phase: int) -> Status | None:
        """Iterate to optimality for ``cost``; returns a terminal status or None.

        Pricing is Devex (reference-framework weights); reduced costs are
        updated from the pivot row and recomputed at every refactorization.
        """
        streak = 0
        bland = False
        weights = np.ones(self.N)
        d = self._reduced_costs(cost)
        while True:
            if self.iterations >= self.max_iter:
                return Status.NUMERICAL
            if self.deadline is not None and (self.iterations & 31) == 0 and time.perf_counter() > self.deadline:
                return Status.TIME_LIMIT
            if len(self.factor.etas) >= REFACTOR_EVERY:
                self._refactor()
                d = self._reduced_costs(cost)

            st = self.state
            inc = ((st == _LOWER) | (st == _FREE)) & (d < -DUAL_TOL)
            dec = ((st == _UPPER) | (st == _FREE)) & (d > DUAL_TOL)
            elig = inc | dec
            if not elig.any():
                if len(self.factor.etas) == 0:
                    return None
                # confirm optimality with freshly computed reduced costs
                self._refactor()
                d = self._reduced_costs(cost)
                st = self.state
                inc = ((st == _LOWER) | (st == _FREE)) & (d < -DUAL_TOL)
                dec = ((st == _UPPER) | (st == _FREE)) & (d > DUAL_TOL)
                elig = inc | dec
                if not elig.any():
                    return None
            if bland:
                q = int(np.flatnonzero(elig)[0])
            else:
                score = np.where(elig, d * d / weights, -1.0)
                q = int(np.argmax(score))
            direction = 1.0 if inc[q] else -1.0

            alpha = self.factor.ftran(self._column(q))
            rate = -direction * alpha
            xb = self.x[self.basis]
            lb = self.lo[self.basis]
            ub = self.up[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                dn = rate < -PIVOT_TOL
                upm = rate > PIVOT_TOL
                lim = np.full(self.m, np.inf)
                lim[dn] = (xb[dn] - lb[dn]) / -rate[dn]
                lim[upm] = (ub[upm] - xb[upm]) / rate[upm]
            np.maximum(lim, 0.0, out=lim)
            t_flip = self.up[q] - self.lo[q]
            t_row = float(lim.min()) if self.m else np.inf
            if not np.isfinite(t_row) and not np.isfinite(t_flip):
                if phase == 1:
                    return Status.NUMERICAL
                return Status.UNBOUNDED

            if t_flip <= t_row:
                t, r = t_flip, -1
            else:
                t = t_row
                ties = np.flatnonzero(lim <= t_row + 1e-12)
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(alpha[ties]))])

            self.iterations += 1
            if t <= 1e-12:
                streak += 1
                if streak >= DEGENERATE_STREAK:
                    bland = True
            else:
                streak = 0
                bland = False

            self.x[q] += direction * t
            self.x[self.basis] -= direction * t * alpha
            if r < 0:
                self.state[q] = _UPPER if direction > 0 else _LOWER
                self.x[q] = self.up[q] if direction > 0 else self.lo[q]
                continue

            # pivot row of B^-1 M, needed for the dual and weight updates
            e_r = np.zeros(self.m)
            e_r[r] = 1.0
            rho = self.factor.btran(e_r)
            row = self.MT @ rho
            a_rq = alpha[r]
            theta_d = d[q] / a_rq
            d -= theta_d * row
            ratio = row / a_rq
            wq = weights[q]
            np.maximum(weights, ratio * ratio * wq, out=weights)

            leave = int(self.basis[r])
            to_lower = rate[r] < 0
            self.x[leave] = self.lo[leave] if to_lower else self.up[leave]
            if self.lo[leave] == self.up[leave]:
                self.state[leave] = _FIXED
            else:
                self.state[leave] = _LOWER if to_lower else _UPPER
            if phase == 1 and leave >= self.n + self.m:
                # an artificial that left the basis never comes back
                self.up[leave] = 0.0
                self.x[leave] = 0.0
                self.state[leave] = _FIXED
            weights[leave] = max(wq / (a_rq * a_rq), 1.0)
            d[q] = 0.0
            self.basis[r] = q
            self.state[q] = _BASIC
            self.factor.update(r, alpha)

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        y = self.factor.btran(cost[self.basis])
        d = cost - self.MT @ y
        d[self.basis] = 0.0
        return d

    def solve(self) -> Status:
        k = len(self.art_cols)
        if k:
            # composite pass: artificials priced at BIG_M alongside the true
            # costs; a pure feasibility pass follows only if some remain
            cost0 = np.zeros(self.N)
            cost0[: self.n] = self.c
            cost0[self.art_cols] = BIG_M
            status = self.run_phase(cost0, 1)
            if status not in (None, Status.UNBOUNDED, Status.NUMERICAL):
                return status
            self._refactor()
            if status is not None or np.sum(self.x[self.art_cols]) > 1e-9 * (1.0 + float(np.max(np.abs(self.b), initial=0.0))):
                cost1 = np.zeros(self.N)
                cost1[self.art_cols] = 1.0
                status = self.run_phase(cost1, 1)
                if status is not None:
                    return status
                self._refactor()
            infeas = float(np.sum(self.x[self.art_cols]))
            if infeas > 1e-7 * (1.0 + float(np.max(np.abs(self.b), initial=0.0))):
                return Status.INFEASIBLE
            self.up[self.art_cols] = 0.0
            nonbasic_art = self.art_cols[self.state[self.art_cols] != _BASIC]
            self.x[nonbasic_art] = 0.0
            self.state[nonbasic_art] = _FIXED
        cost2 = np.zeros(self.N)
        cost2[: self.n] = self.c
        self.cost = cost2
        status = self.run_phase(cost2, 2)
        if status is not None:
            return status
        self._refactor()
        return Status.OPTIMAL

    def duals(self) -> tuple[np.ndarray, np.ndarray]:
        y = self.factor.btran(self.cost[self.basis])
        d = self.cost - self.MT @ y
        y_orig = self.cost_scale * y / self.row_scale
        d_orig = self.cost_scale * d[: self.n]
        return y_orig, d_orig


def _solve_rowless(lp: LinearProgram) -> SolveResult:
    x = np.where(lp.c > 0, lp.lb, np.where(lp.c < 0, lp.ub, np.where(np.isfinite(lp.lb), lp.lb, np.where(np.isfinite(lp.ub), lp.ub, 0.0))))
    if not np.all(np.isfinite(x)):
        return SolveResult(Status.UNBOUNDED, None, -np.inf, -np.inf, np.inf)
    obj = float(lp.c @ x)
    return SolveResult(Status.OPTIMAL, x, obj, obj, 0.0, duals=np.zeros(0), reduced_costs=lp.c.copy())


def simplex_solve(
    lp: LinearProgram,
    *,
    time_limit: float | None = None,
    max_iter: int | None = None,
    use_presolve: bool = True,
) -> SolveResult:
    """Solve ``lp`` to optimality with the revised primal simplex.

    The result carries row duals ``y`` and reduced costs ``c - A^T y`` for the
    original (not presolved) problem.
    """
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit

    if use_presolve:
        pre = presolve(lp)
        if pre.infeasible:
            return SolveResult(Status.INFEASIBLE, None, np.inf, np.inf, np.inf, wall_time=time.perf_counter() - start, message=pre.infeasible)
        work = pre.lp
    else:
        pre = None
        work = lp

    if work.num_rows == 0:
        res = _solve_rowless(work)
        iters = 0
        y_red = np.zeros(0)
    else:
        engine = _Simplex(work, deadline, max_iter)
        status = engine.solve()
        iters = engine.iterations
        if status != Status.OPTIMAL:
            inf = np.inf if status == Status.INFEASIBLE else -np.inf
            return SolveResult(status, None, inf, inf if status == Status.INFEASIBLE else -np.inf, np.inf,
                               iterations=iters, wall_time=time.perf_counter() - start)
        xr = engine.x[: work.num_vars].copy()
        y_red, _ = engine.duals()
        res = SolveResult(Status.OPTIMAL, xr, float(work.c @ xr), 0.0, 0.0)

    if res.status != Status.OPTIMAL:
        res.wall_time = time.perf_counter() - start
        return res

    if pre is not None:
        x = pre.expand_x(res.x)
        y = pre.expand_duals(y_red, lp.num_rows)
    else:
        x = res.x
        y = y_red
    # snap to bounds to remove round-off
    x = np.minimum(np.maximum(x, lp.lb), lp.ub)
    obj = float(lp.c @ x)
    d = lp.c - lp.A.T @ y
    return SolveResult(
        Status.OPTIMAL,
        x,
        obj,
        obj,
        0.0,
        iterations=iters,
        wall_time=time.perf_counter() - start,
        duals=y,
        reduced_costs=d,
    )
