"""Branch-and-bound over permutation entries with Frank-Wolfe node relaxations.

Each node is a face of the Birkhoff polytope.  The node relaxation is solved
by a FW variant whose LMO vertices are permutations, so every vertex is an
integer candidate checked exactly.  A positive FW dual bound prunes the node;
an exhausted tree certifies non-isomorphism.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .birkhoff import (
    FREE,
    ONE,
    ZERO,
    FixingMask,
    InfeasibleMask,
    face_point,
    fix_entry,
    perfect_matching_closure,
)
from .fw import FwConfig, solve as fw_solve
from .graph import Graph
from .presolve import PresolveConfig, PresolveStats, run_presolve

__all__ = [
    "BnbNode",
    "Frontier",
    "NoFractionalEntry",
    "SolveConfig",
    "SolveResult",
    "branch",
    "global_lower_bound",
    "is_isomorphism",
    "mismatch_count",
    "select_node",
    "solve",
]

ISOMORPHIC = "isomorphic"
NON_ISOMORPHIC = "non_isomorphic"
INCONCLUSIVE = "inconclusive"

STRATEGIES = ("dfs-up", "best-bound", "dfs-down")


class NoFractionalEntry(Exception):
    """The relaxation iterate is integral on every free entry."""


def mismatch_count(A: Graph, B: Graph, perm) -> int:
    """Number of adjacency entries where ``P A P^T`` and ``B`` differ (exact)."""
    p = np.asarray(perm, dtype=np.int64)
    return int(np.count_nonzero(B.adj[np.ix_(p, p)] != A.adj))


def is_isomorphism(A: Graph, B: Graph, perm) -> bool:
    p = np.asarray(perm, dtype=np.int64)
    return bool(np.array_equal(B.adj[np.ix_(p, p)], A.adj))


@dataclass
class BnbNode:
    mask: FixingMask
    lb: float
    depth: int
    id: int
    parent_id: Optional[int] = None
    # fixed-to-one branching decisions on the root path
    ones: int = 0
    warm: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class SolveConfig:
    presolve: Optional[PresolveConfig] = None
    fw: str = "dicg"
    node_strategy: str = "dfs-up"
    max_node_iters: int = 5000
    gap_tol: float = 1e-7
    prune_tol: float = 1e-6
    int_tol: float = 1e-6
    time_limit_ms: float = 3_600_000.0
    max_nodes: Optional[int] = None
    warm_start: bool = True


@dataclass
class SolveResult:
    status: str
    permutation: Optional[np.ndarray] = None
    certificate: Optional[dict] = None
    reason: str = ""
    nodes: int = 0
    fw_iters: int = 0
    wall_ms: float = 0.0
    max_depth: int = 0
    presolve: Optional[PresolveStats] = None
    trace: list = field(default_factory=list)
    global_bounds: list = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status != INCONCLUSIVE


# ---------------------------------------------------------------------------
# node selection


class Frontier:
    """Open nodes: a best-bound heap plus an optional dive child."""

    def __init__(self):
        self._heap: list = []
        self.dive: Optional[BnbNode] = None

    def push(self, node: BnbNode):
        heapq.heappush(self._heap, (node.lb, -node.depth, node.id, node))

    def __len__(self):
        return len(self._heap) + (self.dive is not None)

    def open_nodes(self) -> list[BnbNode]:
        nodes = [entry[3] for entry in self._heap]
        if self.dive is not None:
            nodes.append(self.dive)
        return nodes


def select_node(frontier: Frontier, strategy: str = "dfs-up") -> BnbNode:
    """Pop the next node.

    Best-bound takes the smallest lower bound (ties: deepest, then lowest
    id).  The depth-first strategies keep diving into the child created last
    for the dive and fall back to best-bound once a dive ends.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown node strategy {strategy!r}")
    if not len(frontier):
        raise IndexError("frontier is empty")
    if frontier.dive is not None and strategy != "best-bound":
        node, frontier.dive = frontier.dive, None
        return node
    if frontier.dive is not None:
        frontier.push(frontier.dive)
        frontier.dive = None
    return heapq.heappop(frontier._heap)[3]


def global_lower_bound(frontier: Frontier) -> float:
    nodes = frontier.open_nodes()
    return min((nd.lb for nd in nodes), default=math.inf)


# ---------------------------------------------------------------------------
# branching


def _branch_entry(mask: FixingMask, X: np.ndarray, grad, int_tol: float) -> tuple[int, int]:
    free = mask.status == FREE
    frac = np.abs(X - np.round(X))
    cand = free & (frac > int_tol)
    if not cand.any():
        raise NoFractionalEntry("no fractional free entry")
    r, c = np.nonzero(cand)
    f = np.round(frac[r, c], 12)
    g = np.round(np.abs(grad[r, c]), 12) if grad is not None else np.zeros(r.size)
    k = np.lexsort((c, r, -g, -f))[0]
    return int(r[k]), int(c[k])


def branch(node: BnbNode, X, grad=None, *, int_tol: float = 1e-6,
           ids=None) -> tuple[BnbNode, BnbNode]:
    """Split ``node`` on its most fractional free entry.

    Ties are broken by larger gradient magnitude, then lexicographically.
    Returns ``(one_child, zero_child)``; both inherit the parent bound.

    Raises
    ------
    NoFractionalEntry
        If ``X`` is integral on the free entries.
    """
    X = np.asarray(X, dtype=float)
    i, j = _branch_entry(node.mask, X, grad, int_tol)
    return _children(node, i, j, ids, X)


def _children(node: BnbNode, i: int, j: int, ids, X) -> tuple[BnbNode, BnbNode]:
    ids = ids if ids is not None else itertools.count(node.id + 1)
    one = BnbNode(fix_entry(node.mask, i, j, ONE), node.lb, node.depth + 1, next(ids),
                  node.id, node.ones + 1, X)
    zero = BnbNode(fix_entry(node.mask, i, j, ZERO), node.lb, node.depth + 1, next(ids),
                   node.id, node.ones, X)
    return one, zero


def _integral_branch(node: BnbNode, X: np.ndarray, ids) -> tuple[BnbNode, BnbNode]:
    # X is a permutation that is not an isomorphism; split on one of its free ones
    free_ones = (node.mask.status == FREE) & (X > 0.5)
    r, c = np.nonzero(free_ones)
    return _children(node, int(r[0]), int(c[0]), ids, X)


def _warm_start(mask: FixingMask, parent_X: np.ndarray) -> np.ndarray:
    allowed = mask.allowed
    weights = np.where(allowed, np.clip(parent_X, 0.0, None) + 1e-3, 0.0)
    return face_point(mask, weights)


# ---------------------------------------------------------------------------
# driver


def _leaf_perm(mask: FixingMask) -> np.ndarray:
    r, c = np.nonzero(mask.allowed)
    perm = np.empty(mask.n, dtype=np.int64)
    perm[c] = r
    return perm


def solve(A: Graph, B: Graph, cfg: SolveConfig | None = None) -> SolveResult:
    """Decide whether ``A`` and ``B`` are isomorphic.

    Runs the configured presolve, then the tree search.  The result is
    ``isomorphic`` with an exactly verified permutation, ``non_isomorphic``
    with a presolve or lower-bound certificate, or ``inconclusive`` when a
    time or node limit stops the search.
    """
    cfg = cfg or SolveConfig()
    if cfg.node_strategy not in STRATEGIES:
        raise ValueError(f"unknown node strategy {cfg.node_strategy!r}")
    t0 = time.perf_counter()
    deadline = t0 + cfg.time_limit_ms / 1e3
    res = SolveResult(status=INCONCLUSIVE)

    def done(status, **kw):
        res.status = status
        for key, val in kw.items():
            setattr(res, key, val)
        res.wall_ms = (time.perf_counter() - t0) * 1e3
        return res

    if A.n != B.n:
        return done(NON_ISOMORPHIC, certificate={"kind": "size_mismatch", "detail": f"n={A.n} vs n={B.n}"})
    if A.m_directed != B.m_directed:
        return done(NON_ISOMORPHIC, certificate={
            "kind": "size_mismatch", "detail": f"{A.num_edges} vs {B.num_edges} edges"})

    n = A.n
    mask = FixingMask.free(n)
    if cfg.presolve is not None and cfg.presolve.stages:
        mask, pstats = run_presolve(A, B, cfg.presolve, deadline=deadline)
        res.presolve = pstats
        if pstats.infeasible_stage is not None:
            return done(NON_ISOMORPHIC, certificate={
                "kind": "presolve_infeasible", "stage": pstats.infeasible_stage, "detail": pstats.detail})
        if time.perf_counter() > deadline:
            return done(INCONCLUSIVE, reason="time limit reached during presolve")

    ids = itertools.count()
    frontier = Frontier()
    frontier.push(BnbNode(mask, -math.inf, 0, next(ids)))
    fw_cfg = FwConfig(max_iters=cfg.max_node_iters, gap_tol=cfg.gap_tol, cutoff=cfg.prune_tol)
    pruned_lbs: list[float] = []
    found: list[np.ndarray] = []

    def on_vertex(perm) -> bool:
        if is_isomorphism(A, B, perm):
            found.append(perm.copy())
            return True
        return False

    def record(node, lb, gap, action):
        res.trace.append({"id": node.id, "parent": node.parent_id, "depth": node.depth,
                          "lb": lb, "gap": gap, "action": action})
        res.global_bounds.append(global_lower_bound(frontier))

    while len(frontier):
        if time.perf_counter() > deadline:
            return done(INCONCLUSIVE, reason="time limit reached")
        if cfg.max_nodes is not None and res.nodes >= cfg.max_nodes:
            return done(INCONCLUSIVE, reason="node limit reached")
        node = select_node(frontier, cfg.node_strategy)
        res.nodes += 1
        res.max_depth = max(res.max_depth, node.depth)
        try:
            face = perfect_matching_closure(node.mask)
        except InfeasibleMask:
            pruned_lbs.append(math.inf)
            record(node, math.inf, None, "infeasible")
            continue
        if face.is_leaf():
            perm = _leaf_perm(face)
            miss = mismatch_count(A, B, perm)
            if miss == 0:
                record(node, 0.0, 0.0, "incumbent")
                return done(ISOMORPHIC, permutation=perm)
            pruned_lbs.append(float(miss))
            record(node, float(miss), 0.0, "pruned")
            continue
        x0 = None
        if cfg.warm_start and node.warm is not None:
            x0 = _warm_start(face, node.warm)
        node.warm = None
        state = fw_solve(cfg.fw, A, B, face, fw_cfg, x0=x0, on_vertex=on_vertex, deadline=deadline)
        res.fw_iters += state.iters
        if found:
            record(node, max(node.lb, state.dual_bound), state.gap, "incumbent")
            return done(ISOMORPHIC, permutation=found[0])
        lb = max(node.lb, state.dual_bound)
        if lb > cfg.prune_tol:
            pruned_lbs.append(lb)
            record(node, lb, state.gap, "pruned")
            continue
        if state.reason == "time":
            return done(INCONCLUSIVE, reason="time limit reached")
        node.mask, node.lb = face, lb
        try:
            one, zero = branch(node, state.X, state.grad, int_tol=cfg.int_tol, ids=ids)
        except NoFractionalEntry:
            P = np.round(state.X)
            perm = np.argmax(P, axis=0)
            if is_isomorphism(A, B, perm):
                record(node, lb, state.gap, "incumbent")
                return done(ISOMORPHIC, permutation=perm)
            one, zero = _integral_branch(node, state.X, ids)
        if cfg.node_strategy == "dfs-up":
            frontier.dive = one
            frontier.push(zero)
        elif cfg.node_strategy == "dfs-down":
            frontier.dive = zero
            frontier.push(one)
        else:
            frontier.push(one)
            frontier.push(zero)
        record(node, lb, state.gap, "branched")

    finite = [b for b in pruned_lbs if math.isfinite(b)]
    cert = {"kind": "positive_lower_bound", "lb": min(finite) if finite else None}
    if not finite:
        cert["detail"] = "every leaf face is infeasible"
    return done(NON_ISOMORPHIC, certificate=cert)
