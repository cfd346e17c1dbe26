"""Graph isomorphism as a convex-constrained quadratic program over the Birkhoff polytope.

The public pieces:

* :mod:`gifw.graph` for adjacency matrices and graph6 / edge-list I/O,
* :mod:`gifw.birkhoff` for fixing masks and the linear minimization oracle,
* :mod:`gifw.fw` for Frank-Wolfe, DICG and BPCG,
* :mod:`gifw.presolve` for invariant-based and OBBT variable fixing,
* :mod:`gifw.bnb` for the exact branch-and-bound decision procedure,
* :mod:`gifw.heuristics` for the DC-programming heuristic.
"""

__version__ = "0.1.0"

from .bnb import SolveConfig, SolveResult, solve
from .graph import Graph, parse_graph6, read_graph, write_graph6
from .heuristics import DcConfig, solve_dc
from .presolve import PresolveConfig, run_presolve

__all__ = [
    "DcConfig",
    "Graph",
    "PresolveConfig",
    "SolveConfig",
    "SolveResult",
    "parse_graph6",
    "read_graph",
    "run_presolve",
    "solve",
    "solve_dc",
    "write_graph6",
]
