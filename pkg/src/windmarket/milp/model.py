"""Problem and result containers for the LP/MILP solvers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

LE, EQ, GE = "<=", "==", ">="
SENSES = (LE, EQ, GE)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    GAP_LIMIT = "GapLimit"
    TIME_LIMIT = "TimeLimit"
    NODE_LIMIT = "NodeLimit"
    NUMERICAL = "NumericalError"


@dataclass(frozen=True)
class LinearProgram:
    """``min c·x  s.t.  A x (sense) b,  lb <= x <= ub``.

    ``A`` is kept in CSR (row) form. Bounds may be infinite.
    """

    c: np.ndarray
    A: sp.csr_matrix
    senses: tuple[str, ...]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    var_names: tuple[str, ...] | None = None
    row_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float)
        b = np.asarray(self.b, dtype=float)
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        A = sp.csr_matrix(self.A, dtype=float)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "senses", tuple(self.senses))

        m, n = A.shape
        if c.shape != (n,) or lb.shape != (n,) or ub.shape != (n,):
            raise ValueError(f"column dimension mismatch: A has {n} columns")
        if b.shape != (m,) or len(self.senses) != m:
            raise ValueError(f"row dimension mismatch: A has {m} rows")
        bad = [s for s in self.senses if s not in SENSES]
        if bad:
            raise ValueError(f"unknown row sense {bad[0]!r}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(b)) and np.all(np.isfinite(A.data))):
            raise ValueError("objective, matrix and right-hand side must be finite")
        if np.any(lb > ub):
            j = int(np.argmax(lb > ub))
            raise ValueError(f"variable {j}: lower bound {lb[j]} exceeds upper bound {ub[j]}")
        if self.var_names is not None and len(self.var_names) != n:
            raise ValueError("var_names length does not match the number of columns")
        if self.row_names is not None and len(self.row_names) != m:
            raise ValueError("row_names length does not match the number of rows")

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def num_vars(self) -> int:
        return self.A.shape[1]

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> LinearProgram:
        return LinearProgram(self.c, self.A, self.senses, self.b, lb, ub, self.var_names, self.row_names)

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x

    def max_violation(self, x: np.ndarray) -> float:
        """Largest absolute violation of any row or bound at ``x``."""
        r = self.A @ x - self.b
        senses = np.asarray(self.senses)
        row_viol = np.where(senses == LE, np.maximum(r, 0.0), np.where(senses == GE, np.maximum(-r, 0.0), np.abs(r)))
        return max(
            float(np.max(row_viol, initial=0.0)),
            float(np.max(self.lb - x, initial=0.0)),
            float(np.max(x - self.ub, initial=0.0)),
        )


@dataclass(frozen=True)
class MixedIntegerProgram:
    lp: LinearProgram
    binaries: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.binaries, dtype=np.int64)
        object.__setattr__(self, "binaries", idx)
        n = self.lp.num_vars
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ValueError("binary index out of range")
        if len(np.unique(idx)) != idx.size:
            raise ValueError("duplicate binary index")
        if np.any(self.lp.lb[idx] < 0) or np.any(self.lp.ub[idx] > 1):
            raise ValueError("binary variables must be bounded within [0, 1]")


@dataclass
class SolveResult:
    status: Status
    x: np.ndarray | None
    objective: float
    bound: float
    gap: float
    nodes: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    message: str = ""
    history: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def has_solution(self) -> bool:
        return self.x is not None


def relative_gap(incumbent: float, bound: float) -> float:
    if not np.isfinite(incumbent):
        return float("inf")
    if not np.isfinite(bound):
        return float("inf")
    return max(0.0, incumbent - bound) / max(abs(incumbent), 1e-10)


def dump_sparse(mip: MixedIntegerProgram | LinearProgram, path: str | Path) -> None:
    """Write a plain-text sparse dump, one line per nonzero.

    Lines are tagged ``obj j c``, ``nz i j a``, ``row i sense b``,
    ``bnd j lb ub`` and ``int j``.
    """
    lp = mip.lp if isinstance(mip, MixedIntegerProgram) else mip
    coo = lp.A.tocoo()

    def num(v) -> str:
        # shortest round-trip text; integral values without a trailing ".0"
        v = float(v)
        return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# rows {lp.num_rows} cols {lp.num_vars} nnz {lp.A.nnz}\n")
        for j, cj in enumerate(lp.c):
            if cj != 0.0:
                fh.write(f"obj {j} {num(cj)}\n")
        for i, j, a in sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())):
            fh.write(f"nz {i} {j} {num(a)}\n")
        for i, (s, bi) in enumerate(zip(lp.senses, lp.b)):
            fh.write(f"row {i} {s} {num(bi)}\n")
        for j, (lo, hi) in enumerate(zip(lp.lb, lp.ub)):
            fh.write(f"bnd {j} {num(lo)} {num(hi)}\n")
        if isinstance(mip, MixedIntegerProgram):
            for j in mip.binaries:
                fh.write(f"int {int(j)}\n")
