import json

import networkx as nx
import numpy as np
import pytest

from conftest import from_nx
from gifw.birkhoff import FREE, ONE, ZERO, FixingMask, fix_entry
from gifw.bnb import (
    BnbNode,
    Frontier,
    NoFractionalEntry,
    SolveConfig,
    branch,
    global_lower_bound,
    is_isomorphism,
    select_node,
    solve,
)
from gifw.fw import FwConfig, solve_dicg
from gifw.graph import Graph, apply_permutation, flip_edges
from gifw.presolve import PresolveConfig
from oracles import all_perms, brute_isomorphic, objective_np, random_adj


def _node(lb, depth, id_, n=3):
    return BnbNode(FixingMask.free(n), lb, depth, id_)


def test_k2_solved_at_root():
    k2 = Graph.from_edges(2, [(0, 1)])
    res = solve(k2, k2)
    assert res.status == "isomorphic" and res.nodes <= 1
    assert is_isomorphism(k2, k2, res.permutation)


@pytest.mark.parametrize("strategy", ["dfs-up", "best-bound", "dfs-down"])
@pytest.mark.parametrize("fw", ["fw", "dicg", "bpcg"])
def test_petersen_permuted(strategy, fw, petersen):
    B = apply_permutation(petersen, np.random.default_rng(11).permutation(10))
    res = solve(petersen, B, SolveConfig(node_strategy=strategy, fw=fw))
    assert res.status == "isomorphic"
    p = res.permutation
    P = np.zeros((10, 10), dtype=np.int64)
    P[p, np.arange(10)] = 1
    assert np.array_equal(P @ petersen.adj.astype(np.int64) @ P.T, B.adj)


def test_regular_vs_flipped_is_non_isomorphic():
    g = from_nx(nx.random_regular_graph(3, 8, seed=5))
    # flip an edge and a non-edge so the edge count is unchanged
    a = g.adj.copy()
    u, v = g.edges()[0]
    x, y = next((i, j) for i in range(8) for j in range(i + 1, 8) if not a[i, j] and {i, j} != {u, v})
    a[u, v] = a[v, u] = 0
    a[x, y] = a[y, x] = 1
    B = apply_permutation(Graph(a), np.random.default_rng(5).permutation(8))
    assert not brute_isomorphic(g.adj, B.adj)
    for presolve in (None, PresolveConfig()):
        res = solve(g, B, SolveConfig(presolve=presolve))
        assert res.status == "non_isomorphic"
        assert res.certificate["kind"] in ("positive_lower_bound", "presolve_infeasible")


def test_size_mismatch(k3, c6, petersen):
    assert solve(k3, c6).certificate["kind"] == "size_mismatch"
    flipped = flip_edges(petersen, 1, 0)
    res = solve(petersen, flipped)
    assert res.status == "non_isomorphic" and res.nodes == 0


def test_presolve_certificate(two_triangles, c6):
    res = solve(two_triangles, c6, SolveConfig(presolve=PresolveConfig()))
    assert res.status == "non_isomorphic"
    assert res.certificate["kind"] == "presolve_infeasible" and res.certificate["stage"] == "clique"
    assert res.fw_iters == 0


def test_co_regular_pair_without_presolve(two_triangles, c6):
    res = solve(two_triangles, c6)
    assert res.status == "non_isomorphic"
    assert res.certificate["kind"] == "positive_lower_bound"
    assert res.certificate["lb"] > 1e-6
    assert res.nodes > 1


def test_branch_examples():
    X = np.eye(3)
    X[0, :2] = 0.5
    X[1, :2] = 0.5
    node = _node(0.0, 0, 0)
    one, zero = branch(node, X)
    assert one.mask.status[0, 0] == ONE and zero.mask.status[0, 0] == ZERO
    assert one.lb == zero.lb == 0.0 and one.depth == zero.depth == 1
    assert one.parent_id == zero.parent_id == 0
    with pytest.raises(NoFractionalEntry):
        branch(node, np.eye(3))


def test_branch_tie_break_by_gradient():
    X = np.full((2, 2), 0.5)
    grad = np.array([[0.0, 0.0], [0.0, 3.0]])
    one, _ = branch(_node(0.0, 0, 0, n=2), X, grad)
    assert one.mask.status[1, 1] == ONE


def test_select_node_rules():
    f = Frontier()
    deep, shallow = _node(0.0, 3, 1), _node(0.5, 1, 2)
    f.push(shallow)
    f.push(deep)
    assert select_node(f, "best-bound") is deep
    f.push(deep)
    fresh = _node(9.0, 4, 3)
    f.dive = fresh
    assert select_node(f, "dfs-up") is fresh
    # dive over: same choice as best-bound
    assert select_node(f, "dfs-up") is deep
    assert global_lower_bound(Frontier()) == np.inf
    g = Frontier()
    g.push(_node(-1e-9, 0, 0))
    assert global_lower_bound(g) == -1e-9
    with pytest.raises(ValueError):
        select_node(g, "random")


def test_depth_bounded_and_global_bound_monotone():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(4, 8))
        A = Graph(random_adj(n, 0.5, rng))
        B = apply_permutation(A, rng.permutation(n))
        if rng.random() < 0.5:
            B = flip_edges(B, 2, int(rng.integers(1000)))
        res = solve(A, B, SolveConfig(node_strategy="dfs-up"))
        assert res.max_depth <= n
        b = res.global_bounds
        assert all(y >= x for x, y in zip(b, b[1:]))


def test_node_lower_bounds_are_sound():
    # a node bound above the prune tolerance must exclude every isomorphism in its face
    rng = np.random.default_rng(8)
    pruned = 0
    for _ in range(60):
        n = int(rng.integers(4, 7))
        A = Graph(random_adj(n, 0.5, rng))
        B = apply_permutation(A, rng.permutation(n))
        mask = FixingMask.free(n)
        for _ in range(2):
            i, j = rng.integers(0, n, 2)
            if mask.status[i, j] == FREE:
                mask = fix_entry(mask, int(i), int(j), ONE)
        st = solve_dicg(A, B, mask, FwConfig(cutoff=1e-6))
        if st.dual_bound > 1e-6:
            pruned += 1
            cols = np.arange(n)
            for p in all_perms(n):
                if (mask.status[p, cols] == ZERO).any():
                    continue
                P = np.zeros((n, n))
                P[p, cols] = 1
                assert objective_np(P, A.adj, B.adj) > 0
    assert pruned > 5


def test_limits_give_inconclusive():
    g = from_nx(nx.random_regular_graph(3, 40, seed=1))
    B = apply_permutation(g, np.random.default_rng(1).permutation(40))
    res = solve(g, B, SolveConfig(time_limit_ms=1))
    assert res.status == "inconclusive" and res.permutation is None
    res = solve(g, B, SolveConfig(max_nodes=0))
    assert res.status == "inconclusive" and res.reason == "node limit reached"


def test_determinism_of_traces():
    rng = np.random.default_rng(21)
    A = Graph(random_adj(9, 0.4, rng))
    B = flip_edges(apply_permutation(A, rng.permutation(9)), 2, 4)
    if A.m_directed != B.m_directed:
        B = apply_permutation(A, rng.permutation(9))
    runs = [solve(A, B, SolveConfig(node_strategy="best-bound")) for _ in range(2)]
    assert json.dumps(runs[0].trace) == json.dumps(runs[1].trace)
    assert runs[0].status == runs[1].status
