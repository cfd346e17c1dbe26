import networkx as nx
import numpy as np

from gifw.graph import Graph, apply_permutation
from gifw.heuristics import DcConfig, solve_dc

# ### A concave penalty
#
# Subtracting lam ||X||_F^2 pushes the relaxation towards vertices.  The
# problem is a difference of convex functions; each outer step linearizes
# the concave part and solves the convex rest with Frank-Wolfe.  The merit
# f(X) - lam ||X||^2 never increases.

rng = np.random.default_rng(0)
wins = 0
for seed in range(10):
    t = nx.random_labeled_tree(8, seed=seed)
    A = Graph.from_edges(8, t.edges())
    B = apply_permutation(A, rng.permutation(8))
    res = solve_dc(A, B, DcConfig(lam=1e-2, seed=seed))
    wins += res.status == "isomorphic"
    print(f"seed {seed}: {res.status:12s} outer={res.outer_iters:2d} merit {res.merits[0]:.3f} -> {res.merits[-1]:.3f}")
print(f"{wins}/10 trees matched")

# The heuristic only reports permutations that pass the exact check, and it
# can never prove non-isomorphism.

two_triangles = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
hexagon = Graph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)])
print("K3+K3 vs C6:", solve_dc(two_triangles, hexagon).status)
