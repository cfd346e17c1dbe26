import networkx as nx
import numpy as np

from gifw.birkhoff import FixingMask, ONE
from gifw.graph import Graph, apply_permutation
from gifw.presolve import (
    PresolveConfig,
    clique_counts,
    obbt_fix,
    run_presolve,
    star_counts,
)


def G(nxg):
    nxg = nx.convert_node_labels_to_integers(nxg)
    return Graph.from_edges(nxg.number_of_nodes(), nxg.edges())


# ### Vertex invariants
#
# A vertex can only be mapped to a vertex with the same degree, the same
# number of s-cliques through it, and the same number of maximal stars
# (maximal independent sets of its neighbourhood) of each size.

k4 = G(nx.complete_graph(4))
print("K4 cliques through each vertex (size 3, size 4):", clique_counts(k4, 4).cliques[0].tolist())
print("K4 stars per vertex:", star_counts(k4).stars[0])
print("claw centre stars:", star_counts(G(nx.star_graph(3))).stars[0])

# ### Combinatorial presolve
#
# Disagreeing pairs are fixed to zero.  If no permutation survives, the
# graphs are proven non-isomorphic without any optimization.

two_triangles = G(nx.disjoint_union(nx.complete_graph(3), nx.complete_graph(3)))
hexagon = G(nx.cycle_graph(6))
mask, stats = run_presolve(two_triangles, hexagon)
print("K3+K3 vs C6: infeasible at stage", stats.infeasible_stage)

# Vertex-transitive graphs give every vertex the same record, so nothing is
# fixed.  Irregular graphs lose many candidates.

petersen = G(nx.petersen_graph())
rng = np.random.default_rng(0)
_, stats = run_presolve(petersen, apply_permutation(petersen, rng.permutation(10)))
print("Petersen fixings/n^2:", stats.fixings_fraction)

tree = G(nx.random_labeled_tree(30, seed=2))
_, stats = run_presolve(tree, apply_permutation(tree, rng.permutation(30)))
print("random tree fixings/n^2: %.3f" % stats.fixings_fraction, " stage times (ms):",
      {k: round(v, 2) for k, v in stats.stage_times_ms.items()})

# ### Bound tightening
#
# To prove X[i, j] = 1 in every isomorphism, minimize f(X) + X[i, j].  A
# positive dual bound means no zero-objective point has X[i, j] = 0.  In the
# path 0-1-2 the middle vertex must map to itself.

p3 = Graph.from_edges(3, [(0, 1), (1, 2)])
res = obbt_fix(p3, p3, FixingMask.free(3), (1, 1), ONE, budget=100)
print("OBBT on P3 entry (1,1):", res.verdict, "after", res.iters, "iterations, dual bound %.3f" % res.dual_bound)

mask, stats = run_presolve(tree, apply_permutation(tree, rng.permutation(30)),
                           PresolveConfig(stages=("degree", "star", "obbt"), obbt_budget=30,
                                          obbt_max_trials=40))
print("with OBBT: %d trials, %d fixed, %.1f iterations per trial" % (
    stats.obbt_trials, stats.obbt_fixed, stats.obbt_iters_avg))
