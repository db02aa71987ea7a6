"""A small MILP toolkit: revised simplex plus best-first branch-and-bound."""

from .bnb import Limits, branch_and_bound
from .model import LinearProgram, MixedIntegerProgram, SolveResult, Status, dump_sparse
from .simplex import simplex_solve

__all__ = [
    "Limits",
    "LinearProgram",
    "MixedIntegerProgram",
    "SolveResult",
    "Status",
    "branch_and_bound",
    "dump_sparse",
    "simplex_solve",
]
