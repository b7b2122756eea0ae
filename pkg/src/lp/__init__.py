from src.lp.branch_and_bound import BranchAndBound, solve_mip
from src.lp.model import INF, LinearProgram, LpSolution, LpStatus, Sense
from src.lp.mps import to_mps
from src.lp.simplex import RevisedSimplex, solve_lp

__all__ = [
    "INF",
    "BranchAndBound",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "RevisedSimplex",
    "Sense",
    "solve_lp",
    "solve_mip",
    "to_mps",
]
