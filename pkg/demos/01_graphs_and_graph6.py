import networkx as nx
import numpy as np

from gifw.graph import (
    Graph,
    apply_permutation,
    degree_sequence,
    flip_edges,
    parse_edge_list,
    parse_graph6,
    random_permutation,
    write_graph6,
)

# ### Graphs
#
# A `Graph` is a dense, read-only 0/1 adjacency matrix.  It refuses anything
# that is not symmetric, loop-free and binary.

k3 = Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])
print("K3 adjacency:")
print(k3.adj)
print("vertices:", k3.n, " nonzeros (2|E|):", k3.m_directed)

# ### graph6
#
# graph6 is the nauty exchange format: one header byte for n <= 62, then
# the upper triangle packed six bits per printable character.

print("K3 in graph6:", write_graph6(k3))
print("networkx agrees:", nx.to_graph6_bytes(nx.complete_graph(3), header=False).strip())

g = parse_graph6("D?{")
print("D?{ decodes to", g.n, "vertices with edges", g.edges())

big = Graph.from_edges(100, nx.random_regular_graph(3, 100, seed=0).edges())
text = write_graph6(big)
print("n=100 uses the extended header:", text[:4], "... round trip ok:", parse_graph6(text) == big)

# Plain edge lists are accepted too: a header "n m" and then m pairs.
p3 = parse_edge_list("3 2\n0 1\n1 2")
print("P3 degree sequence:", degree_sequence(p3))

# ### Making instances
#
# Isomorphic pairs come from relabeling, B = P A P^T.  Relabeling 0->1->2->0
# turns the path 0-1-2 into 1-2-0.

b = apply_permutation(p3, [1, 2, 0])
print("relabeled path edges:", b.edges(), " degree of vertex 2:", b.degrees()[2])

petersen = Graph.from_edges(10, nx.petersen_graph().edges())
perm = random_permutation(10, seed=7)
shuffled = apply_permutation(petersen, perm)
print("permuted Petersen has the same degrees:", degree_sequence(shuffled) == degree_sequence(petersen))

# Non-isomorphic pairs come from toggling random vertex pairs.  The choice is
# a seeded shuffle, so flipping twice with the same seed restores the graph.

flipped = flip_edges(petersen, 2, seed=3)
print("entries changed by 2 flips:", int(np.count_nonzero(flipped.adj != petersen.adj)))
print("flip twice restores:", flip_edges(flipped, 2, seed=3) == petersen)
