"""Best-first branch-and-bound over binary variables."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .model import MixedIntegerProgram, SolveResult, Status, relative_gap
from .simplex import simplex_solve

INT_TOL = 1e-6
OPTIMAL_GAP = 1e-4


@dataclass(frozen=True)
class Limits:
    mip_gap: float = OPTIMAL_GAP
    time_limit: float | None = 60.0
    node_limit: int | None = None

    def __post_init__(self) -> None:
        if self.mip_gap < 0:
            raise ValueError("mip_gap must be non-negative")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be at least 1")


def _most_fractional(xb: np.ndarray) -> int:
    """Position of the most fractional entry, or -1 if all are integral."""
    frac = np.abs(xb - np.round(xb))
    if frac.max(initial=0.0) <= INT_TOL:
        return -1
    # distance to 0.5; argmin returns the lowest index on ties
    return int(np.argmin(np.where(frac > INT_TOL, np.abs(frac - 0.5), np.inf)))


def branch_and_bound(
    mip: MixedIntegerProgram,
    limits: Limits = Limits(),
    *,
    dive_until_incumbent: bool = True,
) -> SolveResult:
    """Minimise ``mip`` by LP-based branch-and-bound.

    Nodes are explored lowest bound first (ties in insertion order) and
    branch on the most fractional binary (lowest index on ties). While no
    integral solution is known the search instead plunges depth-first,
    up-branch first, so an incumbent appears early; set
    ``dive_until_incumbent=False`` for pure best-first order.
    """
    start = time.perf_counter()
    deadline = None if limits.time_limit is None else start + limits.time_limit
    lp = mip.lp
    bins = mip.binaries
    base_lb, base_ub = lp.lb.copy(), lp.ub.copy()

    incumbent_x: np.ndarray | None = None
    incumbent = np.inf
    best_bound = -np.inf
    nodes = 0
    iterations = 0
    history: list[tuple[int, float, float]] = []
    counter = itertools.count()
    # heap entries: (bound, seq, lb_bins, ub_bins)
    heap: list[tuple[float, int, np.ndarray, np.ndarray]] = []
    stack: list[tuple[float, int, np.ndarray, np.ndarray]] = []

    def finish(status: Status, message: str = "") -> SolveResult:
        bound = min(best_bound, incumbent) if incumbent_x is not None else best_bound
        return SolveResult(
            status,
            incumbent_x,
            float(incumbent),
            float(bound),
            relative_gap(incumbent, bound),
            nodes=nodes,
            iterations=iterations,
            wall_time=time.perf_counter() - start,
            message=message,
            history=history,
        )

    def remaining() -> float | None:
        if deadline is None:
            return None
        return max(deadline - time.perf_counter(), 1e-3)

    root = (-np.inf, next(counter), base_lb[bins].copy(), base_ub[bins].copy())
    heap.append(root)

    while heap or stack:
        open_bounds = [e[0] for e in heap] + [e[0] for e in stack]
        frontier = min(open_bounds) if open_bounds else np.inf
        if incumbent_x is not None:
            frontier = min(frontier, incumbent)
        best_bound = max(best_bound, frontier)
        if incumbent_x is not None:
            gap = relative_gap(incumbent, best_bound)
            if gap <= limits.mip_gap:
                return finish(Status.OPTIMAL if gap <= OPTIMAL_GAP else Status.GAP_LIMIT)
        if limits.node_limit is not None and nodes >= limits.node_limit:
            return finish(Status.NODE_LIMIT)
        if deadline is not None and time.perf_counter() > deadline:
            return finish(Status.TIME_LIMIT)

        if stack and incumbent_x is None and dive_until_incumbent:
            key, _, nlb, nub = stack.pop()
        else:
            if stack:
                for entry in stack:
                    heapq.heappush(heap, entry)
                stack.clear()
            key, _, nlb, nub = heapq.heappop(heap)

        if incumbent_x is not None and key >= incumbent - 1e-9 * max(1.0, abs(incumbent)):
            continue

        lb, ub = base_lb.copy(), base_ub.copy()
        lb[bins], ub[bins] = nlb, nub
        res = simplex_solve(lp.with_bounds(lb, ub), time_limit=remaining())
        nodes += 1
        iterations += res.iterations
        if res.status == Status.TIME_LIMIT:
            history.append((nodes, incumbent, best_bound))
            return finish(Status.TIME_LIMIT)
        if res.status == Status.UNBOUNDED and nodes == 1:
            return finish(Status.UNBOUNDED, "LP relaxation is unbounded")
        if res.status == Status.NUMERICAL:
            history.append((nodes, incumbent, best_bound))
            if nodes == 1:
                return finish(Status.NUMERICAL, "root LP failed")
            continue
        if res.status != Status.OPTIMAL:
            history.append((nodes, incumbent, best_bound))
            continue

        obj = res.objective
        if nodes == 1:
            best_bound = obj
        if incumbent_x is not None and obj >= incumbent - 1e-9 * max(1.0, abs(incumbent)):
            history.append((nodes, incumbent, best_bound))
            continue

        xb = res.x[bins]
        k = _most_fractional(xb)
        if k < 0:
            x = res.x.copy()
            x[bins] = np.round(xb)
            value = float(lp.c @ x)
            if value < incumbent:
                incumbent, incumbent_x = value, x
            history.append((nodes, incumbent, best_bound))
            continue

        history.append((nodes, incumbent, best_bound))
        down_ub = nub.copy()
        down_ub[k] = 0.0
        up_lb = nlb.copy()
        up_lb[k] = 1.0
        down = (obj, next(counter), nlb, down_ub)
        up = (obj, next(counter), up_lb, nub)
        if incumbent_x is None and dive_until_incumbent:
            # plunge into the up-branch first; committing a unit rarely
            # makes the relaxation infeasible
            stack.extend([down, up])
        else:
            heapq.heappush(heap, down)
            heapq.heappush(heap, up)

    if incumbent_x is None:
        return finish(Status.INFEASIBLE, "no integral solution exists")
    best_bound = incumbent
    return finish(Status.OPTIMAL)
