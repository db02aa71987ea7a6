"""Light presolve: fixed columns, empty rows, rows implied by variable bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import EQ, GE, LE, LinearProgram

FIX_TOL = 1e-12
ROW_TOL = 1e-9


@dataclass
class Presolved:
    lp: LinearProgram | None
    cols: np.ndarray
    rows: np.ndarray
    x_fixed: np.ndarray
    infeasible: str = ""

    def expand_x(self, x_reduced: np.ndarray) -> np.ndarray:
        x = self.x_fixed.copy()
        x[self.cols] = x_reduced
        return x

    def expand_duals(self, y_reduced: np.ndarray, m: int) -> np.ndarray:
        y = np.zeros(m)
        y[self.rows] = y_reduced
        return y


def _activity_range(A: sp.csr_matrix, lb: np.ndarray, ub: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pos = A.maximum(0).tocsr()
    neg = A.minimum(0).tocsr()
    with np.errstate(invalid="ignore"):
        lo = _safe_matvec(pos, lb) + _safe_matvec(neg, ub)
        hi = _safe_matvec(pos, ub) + _safe_matvec(neg, lb)
    return lo, hi


def _safe_matvec(M: sp.csr_matrix, v: np.ndarray) -> np.ndarray:
    # inf * 0 must not produce nan: only structural nonzeros contribute
    finite = np.where(np.isfinite(v), v, 0.0)
    out = M @ finite
    inf_mask = ~np.isfinite(v)
    if inf_mask.any():
        sign = np.sign(v) * inf_mask
        contrib = (M.multiply(sign[np.newaxis, :])).tocsr()
        pos_inf = np.asarray((contrib > 0).sum(axis=1)).ravel() > 0
        neg_inf = np.asarray((contrib < 0).sum(axis=1)).ravel() > 0
        out = out.astype(float)
        out[pos_inf & ~neg_inf] = np.inf
        out[neg_inf & ~pos_inf] = -np.inf
        out[pos_inf & neg_inf] = np.nan
    return out


def presolve(lp: LinearProgram) -> Presolved:
    n, m = lp.num_vars, lp.num_rows
    fixed = (lp.ub - lp.lb) <= FIX_TOL
    x_fixed = np.zeros(n)
    x_fixed[fixed] = lp.lb[fixed]
    cols = np.flatnonzero(~fixed)

    A = lp.A
    b = lp.b - A @ x_fixed
    A = A[:, cols].tocsr()
    lb, ub = lp.lb[cols], lp.ub[cols]
    senses = np.asarray(lp.senses)

    lo, hi = _activity_range(A, lb, ub)
    tol = ROW_TOL * (1.0 + np.abs(b))
    is_le, is_eq, is_ge = senses == LE, senses == EQ, senses == GE
    with np.errstate(invalid="ignore"):
        bad = ((is_le | is_eq) & (lo > b + tol)) | ((is_ge | is_eq) & (hi < b - tol))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            return Presolved(None, cols, np.arange(m), x_fixed, f"row {i} cannot be satisfied")
        empty = np.diff(A.indptr) == 0
        drop = (is_le & (hi <= b)) | (is_ge & (lo >= b)) | (is_eq & empty)

    rows = np.flatnonzero(~drop)
    names = None
    if lp.var_names is not None:
        names = tuple(lp.var_names[j] for j in cols)
    rnames = None
    if lp.row_names is not None:
        rnames = tuple(lp.row_names[i] for i in rows)
    reduced = LinearProgram(
        lp.c[cols],
        A[rows],
        tuple(senses[rows].tolist()),
        b[rows],
        lb,
        ub,
        names,
        rnames,
    )
    return Presolved(reduced, cols, rows, x_fixed)
