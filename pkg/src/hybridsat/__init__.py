"""Space-splitting 3-SAT solvers with classical and QBall-based promise-ball subroutines."""

from .cnf import Formula, evaluate, parse_dimacs, to_dimacs
from .hybrid import SolveReport, Strategy, brute_force, solve

__version__ = "0.1.0"

__all__ = ["Formula", "SolveReport", "Strategy", "brute_force", "evaluate", "parse_dimacs", "solve", "to_dimacs"]
