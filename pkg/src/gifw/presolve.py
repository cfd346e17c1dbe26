"""Variable fixing before the tree search.

Combinatorial stages compare isomorphism-invariant vertex records (degree,
clique counts, neighbourhood independent-set counts) and forbid pairing
vertices whose records differ.  The optimization-based stage (OBBT) proves
fixings by showing that an augmented objective has a positive lower bound.

Masks follow the solver orientation: entry ``(r, c)`` pairs vertex ``r`` of
the second graph with vertex ``c`` of the first.
"""

from __future__ import annotations

import itertools
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .birkhoff import (
    FREE,
    ONE,
    ZERO,
    FixingMask,
    InfeasibleMask,
    Status,
    fix_entry,
    mask_feasible,
    perfect_matching_closure,
)
from .fw import FwConfig, solve as fw_solve
from .graph import Graph

logger = logging.getLogger(__name__)

__all__ = [
    "ObbtResult",
    "PresolveConfig",
    "PresolveStats",
    "VertexInvariants",
    "clique_counts",
    "compatibility_mask",
    "maximal_cliques",
    "obbt_fix",
    "run_presolve",
    "star_counts",
    "vertex_invariants",
]

DEGREE_THRESHOLD = 16


# ---------------------------------------------------------------------------
# bitset clique enumeration


def _bitsets(adj: np.ndarray) -> list[int]:
    out = []
    for row in adj:
        b = 0
        for v in np.flatnonzero(row).tolist():
            b |= 1 << v
        out.append(b)
    return out


def _bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def maximal_cliques(nbr: list[int], candidates: int | None = None) -> Iterator[int]:
    """Bron-Kerbosch with Tomita pivoting over bitset adjacency.

    Yields each maximal clique of the subgraph induced by ``candidates`` as
    a bitmask.  The empty set is yielded only for an empty vertex set.
    """
    if candidates is None:
        candidates = (1 << len(nbr)) - 1

    def expand(R: int, P: int, X: int):
        if not P and not X:
            yield R
            return
        pivot = max(_bits(P | X), key=lambda u: (P & nbr[u]).bit_count())
        for v in _bits(P & ~nbr[pivot]):
            bit = 1 << v
            yield from expand(R | bit, P & nbr[v], X & nbr[v])
            P &= ~bit
            X |= bit

    yield from expand(0, candidates, 0)


def _cliques_from_maximal(nbr: list[int], n: int, k: int) -> np.ndarray:
    counts = np.zeros((n, k - 2), dtype=np.int64)
    seen: set[tuple[int, ...]] = set()
    for c in maximal_cliques(nbr):
        members = list(_bits(c))
        if len(members) < 3:
            continue
        for s in range(3, min(k, len(members)) + 1):
            for sub in itertools.combinations(members, s):
                if sub in seen:
                    continue
                seen.add(sub)
                counts[list(sub), s - 3] += 1
    return counts


def _cliques_by_extension(nbr: list[int], n: int, k: int) -> np.ndarray:
    counts = np.zeros((n, k - 2), dtype=np.int64)

    def grow(members: list[int], cand: int):
        size = len(members)
        if size >= 3:
            counts[members, size - 3] += 1
        if size == k:
            return
        for v in _bits(cand):
            # only larger labels keep each clique counted once
            grow(members + [v], cand & nbr[v] & ~((1 << (v + 1)) - 1))

    for v in range(n):
        grow([v], nbr[v] & ~((1 << (v + 1)) - 1))
    return counts


# ---------------------------------------------------------------------------
# vertex invariants


@dataclass
class VertexInvariants:
    """Per-vertex isomorphism-invariant records.

    ``cliques[v, s - 3]`` counts s-cliques through ``v`` for ``s = 3..k``;
    ``stars[v]`` maps a size to the number of maximal independent sets of
    that size inside the neighbourhood of ``v``.
    """

    degree: np.ndarray
    cliques: Optional[np.ndarray] = None
    stars: Optional[list[dict[int, int]]] = None
    k: Optional[int] = None
    size_cap: Optional[int] = None

    @property
    def n(self) -> int:
        return self.degree.shape[0]

    def signature(self, v: int) -> tuple:
        sig: tuple = (int(self.degree[v]),)
        if self.cliques is not None:
            sig += (tuple(self.cliques[v].tolist()),)
        if self.stars is not None:
            sig += (tuple(sorted(self.stars[v].items())),)
        return sig

    def signatures(self) -> list[tuple]:
        return [self.signature(v) for v in range(self.n)]

    def merged(self, other: "VertexInvariants") -> "VertexInvariants":
        return VertexInvariants(
            degree=self.degree,
            cliques=other.cliques if other.cliques is not None else self.cliques,
            stars=other.stars if other.stars is not None else self.stars,
            k=other.k or self.k,
            size_cap=other.size_cap or self.size_cap,
        )


def clique_counts(g: Graph, k: int = 4, degree_threshold: int = DEGREE_THRESHOLD,
                  method: str | None = None) -> VertexInvariants:
    """Number of s-cliques through each vertex for ``s = 3..k``.

    Bounded-degree graphs go through maximal-clique enumeration with subset
    expansion; otherwise cliques are grown directly up to size ``k``.
    ``method`` (``"maximal"`` or ``"extension"``) overrides the choice.
    """
    n = g.n
    if k < 3:
        raise ValueError("clique size bound k must be at least 3")
    deg = g.degrees()
    nbr = _bitsets(g.adj)
    if method is None:
        method = "maximal" if (n == 0 or deg.max() <= degree_threshold) else "extension"
    if method == "maximal":
        counts = _cliques_from_maximal(nbr, n, k)
    elif method == "extension":
        counts = _cliques_by_extension(nbr, n, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    return VertexInvariants(degree=deg, cliques=counts, k=k)


def _maximal_independent_sets_capped(adj_local: list[int], m: int, cap: int) -> Counter:
    # independent sets of size <= cap, grown in increasing label order; keep maximal ones
    full = (1 << m) - 1
    out: Counter = Counter()

    def dominated(S: int) -> bool:
        covered = S
        for u in _bits(S):
            covered |= adj_local[u]
        return covered == full

    def grow(S: int, size: int, cand: int):
        if size and dominated(S):
            out[size] += 1
        if size == cap:
            return
        for v in _bits(cand):
            grow(S | (1 << v), size + 1, cand & ~adj_local[v] & ~((1 << (v + 1)) - 1))

    grow(0, 0, full)
    return out


def star_counts(g: Graph, size_cap: int = 4, degree_threshold: int = DEGREE_THRESHOLD) -> VertexInvariants:
    """Maximal independent sets by size in each vertex's neighbourhood.

    These are the maximal stars centred at the vertex.  Neighbourhoods
    larger than ``degree_threshold`` only count maximal sets of size at most
    ``size_cap``.
    """
    if size_cap < 1:
        raise ValueError("size_cap must be positive")
    deg = g.degrees()
    stars: list[dict[int, int]] = []
    for v in range(g.n):
        nb = np.flatnonzero(g.adj[v])
        m = nb.size
        if m == 0:
            stars.append({})
            continue
        sub = g.adj[np.ix_(nb, nb)]
        local = _bitsets(sub)
        if m <= degree_threshold:
            full = (1 << m) - 1
            comp = [(~local[u]) & full & ~(1 << u) for u in range(m)]
            c = Counter(s.bit_count() for s in maximal_cliques(comp))
        else:
            c = _maximal_independent_sets_capped(local, m, size_cap)
        stars.append(dict(sorted(c.items())))
    return VertexInvariants(degree=deg, stars=stars, size_cap=size_cap)


def vertex_invariants(g: Graph, *, k: int | None = 4, size_cap: int | None = 4,
                      degree_threshold: int = DEGREE_THRESHOLD) -> VertexInvariants:
    inv = VertexInvariants(degree=g.degrees())
    if k is not None:
        inv = inv.merged(clique_counts(g, k, degree_threshold))
    if size_cap is not None:
        inv = inv.merged(star_counts(g, size_cap, degree_threshold))
    return inv


def compatibility_mask(invA: VertexInvariants, invB: VertexInvariants) -> FixingMask:
    """ZERO at ``(r, c)`` whenever vertex ``r`` of B and ``c`` of A disagree.

    The mask may be infeasible; that is a proof of non-isomorphism.
    """
    if invA.n != invB.n:
        raise ValueError("invariant records have different sizes")
    codes: dict[tuple, int] = {}
    sa = np.array([codes.setdefault(s, len(codes)) for s in invA.signatures()])
    sb = np.array([codes.setdefault(s, len(codes)) for s in invB.signatures()])
    return FixingMask.from_zeros(sb[:, None] != sa[None, :])


# ---------------------------------------------------------------------------
# optimization-based fixing


@dataclass
class ObbtResult:
    verdict: str  # "fixed", "inconclusive" or "infeasible"
    mask: FixingMask
    iters: int
    dual_bound: float


def obbt_fix(A, B, mask: FixingMask, entry: tuple[int, int], target: Status = ONE,
             budget: int = 100, *, tol: float = 1e-6, variant: str = "dicg",
             deadline: float | None = None) -> ObbtResult:
    """Try to prove that ``X[entry]`` equals ``target`` in every isomorphism.

    Target ONE minimizes ``f(X) + X_ij``, target ZERO minimizes
    ``f(X) + 1 - X_ij`` over the masked Birkhoff polytope.  A dual bound
    above ``tol`` within ``budget`` iterations fixes the entry.
    """
    i, j = entry
    target = Status(target)
    if target == FREE:
        raise ValueError("target must be ZERO or ONE")
    if mask.status[i, j] != FREE:
        raise ValueError(f"entry ({i}, {j}) is not free")
    if budget < 1:
        raise ValueError("budget must be at least one iteration")
    if not mask_feasible(mask):
        raise InfeasibleMask("mask is infeasible before the trial")
    n = mask.n
    C = np.zeros((n, n))
    if target == ONE:
        C[i, j], const = 1.0, 0.0
    else:
        C[i, j], const = -1.0, 1.0
    cfg = FwConfig(max_iters=budget, cutoff=tol, gap_tol=0.0, zero_tol=0.0)
    state = fw_solve(variant, A, B, mask, cfg, linear=C, constant=const, deadline=deadline)
    if state.dual_bound <= tol:
        return ObbtResult("inconclusive", mask, state.iters, state.dual_bound)
    new = fix_entry(mask, i, j, target)
    verdict = "fixed" if mask_feasible(new) else "infeasible"
    return ObbtResult(verdict, new, state.iters, state.dual_bound)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class PresolveConfig:
    stages: tuple[str, ...] = ("degree", "clique", "star")
    clique_k: int = 4
    star_cap: int = 4
    degree_threshold: int = DEGREE_THRESHOLD
    obbt_budget: int = 50
    obbt_targets: tuple[str, ...] = ("one",)
    obbt_tol: float = 1e-6
    obbt_variant: str = "dicg"
    obbt_time_ms: float = 60_000.0
    obbt_max_trials: Optional[int] = None


@dataclass
class PresolveStats:
    fixings_fraction: float = 0.0
    obbt_iters_avg: float = 0.0
    obbt_trials: int = 0
    obbt_fixed: int = 0
    stage_times_ms: dict = field(default_factory=dict)
    infeasible_stage: Optional[str] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "fixings_fraction": self.fixings_fraction,
            "obbt_iters_avg": self.obbt_iters_avg,
            "stage_times_ms": dict(self.stage_times_ms),
        }


STAGES = ("degree", "clique", "star", "obbt")


def _obbt_order(mask: FixingMask) -> list[tuple[int, int]]:
    # rows with the fewest remaining candidates first
    free = mask.status == FREE
    per_row = free.sum(axis=1)
    r, c = np.nonzero(free)
    order = np.lexsort((c, r, per_row[r]))
    return list(zip(r[order].tolist(), c[order].tolist()))


def run_presolve(A: Graph, B: Graph, cfg: PresolveConfig | None = None,
                 deadline: float | None = None) -> tuple[FixingMask, PresolveStats]:
    """Run the configured stages in order, stopping at the first infeasibility."""
    cfg = cfg or PresolveConfig()
    unknown = set(cfg.stages) - set(STAGES)
    if unknown:
        raise ValueError(f"unknown presolve stages {sorted(unknown)}")
    n = A.n
    stats = PresolveStats()
    mask = FixingMask.free(n)
    invA = VertexInvariants(degree=A.degrees())
    invB = VertexInvariants(degree=B.degrees())
    obbt_iters = 0
    for stage in STAGES:
        if stage not in cfg.stages:
            continue
        t0 = time.perf_counter()
        if stage == "degree":
            new = mask.with_zeros(compatibility_mask(invA, invB).status == ZERO)
        elif stage == "clique":
            invA = invA.merged(clique_counts(A, cfg.clique_k, cfg.degree_threshold))
            invB = invB.merged(clique_counts(B, cfg.clique_k, cfg.degree_threshold))
            new = mask.with_zeros(compatibility_mask(invA, invB).status == ZERO)
        elif stage == "star":
            invA = invA.merged(star_counts(A, cfg.star_cap, cfg.degree_threshold))
            invB = invB.merged(star_counts(B, cfg.star_cap, cfg.degree_threshold))
            new = mask.with_zeros(compatibility_mask(invA, invB).status == ZERO)
        else:
            new, iters, trials, fixed, verdict = _run_obbt(A, B, mask, cfg, deadline)
            obbt_iters += iters
            stats.obbt_trials += trials
            stats.obbt_fixed += fixed
            if verdict == "infeasible":
                stats.stage_times_ms[stage] = (time.perf_counter() - t0) * 1e3
                stats.infeasible_stage = stage
                stats.detail = "bound tightening produced an infeasible set of fixings"
                mask = new
                break
        feasible = mask_feasible(new)
        if feasible:
            new = perfect_matching_closure(new)
        mask = new
        stats.stage_times_ms[stage] = (time.perf_counter() - t0) * 1e3
        if not feasible:
            stats.infeasible_stage = stage
            stats.detail = f"{stage} invariants admit no vertex bijection"
            break
        if deadline is not None and time.perf_counter() > deadline:
            break
    stats.fixings_fraction = mask.num_fixed / float(n * n)
    stats.obbt_iters_avg = obbt_iters / stats.obbt_trials if stats.obbt_trials else 0.0
    return mask, stats


def _run_obbt(A, B, mask, cfg: PresolveConfig, deadline):
    t_end = time.perf_counter() + cfg.obbt_time_ms / 1e3
    if deadline is not None:
        t_end = min(t_end, deadline)
    targets = [ONE if t == "one" else ZERO for t in cfg.obbt_targets]
    iters = trials = fixed = 0
    for (i, j) in _obbt_order(mask):
        for target in targets:
            if mask.status[i, j] != FREE:
                break
            if time.perf_counter() > t_end or (cfg.obbt_max_trials is not None and trials >= cfg.obbt_max_trials):
                return mask, iters, trials, fixed, "timeout"
            res = obbt_fix(A, B, mask, (i, j), target, cfg.obbt_budget,
                           tol=cfg.obbt_tol, variant=cfg.obbt_variant, deadline=t_end)
            iters += res.iters
            trials += 1
            if res.verdict == "infeasible":
                return res.mask, iters, trials, fixed + 1, "infeasible"
            if res.verdict == "fixed":
                fixed += 1
                mask = perfect_matching_closure(res.mask)
                logger.debug("obbt fixed (%d, %d) to %s", i, j, target.name)
    return mask, iters, trials, fixed, "done"
