"""Undirected simple graphs, graph6 / edge-list I/O and instance generation."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Graph",
    "GraphFormatError",
    "Permutation",
    "apply_permutation",
    "choose_flip_pairs",
    "degree_sequence",
    "flip_edges",
    "parse_edge_list",
    "parse_graph6",
    "perm_matrix",
    "random_permutation",
    "write_graph6",
]

GRAPH6_MAX_N = 258047


class GraphFormatError(ValueError):
    """Raised when a graph cannot be decoded or violates the simple-graph rules."""


class Graph:
    """Undirected simple graph stored as a dense, read-only 0/1 adjacency matrix.

    Parameters
    ----------
    adj : array_like
        Square symmetric 0/1 matrix with zero diagonal.
    """

    __slots__ = ("adj",)

    def __init__(self, adj):
        a = np.array(adj, dtype=np.int8, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise GraphFormatError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise GraphFormatError("adjacency entries must be 0 or 1")
        if np.any(np.diagonal(a)):
            raise GraphFormatError("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise GraphFormatError("adjacency must be symmetric")
        a.flags.writeable = False
        self.adj = a

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        a = np.zeros((n, n), dtype=np.int8)
        for u, v in edges:
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) out of range for n={n}")
            a[u, v] = a[v, u] = 1
        return cls(a)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(np.zeros((n, n), dtype=np.int8))

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @property
    def m_directed(self) -> int:
        return int(self.adj.sum(dtype=np.int64))

    @property
    def num_edges(self) -> int:
        return self.m_directed // 2

    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self.adj, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1, dtype=np.int64)

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adj[v])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash((self.n, self.adj.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


# ---------------------------------------------------------------------------
# Permutations
#
# A permutation is an int array ``perm`` with ``perm[i]`` the image of vertex
# ``i``.  Its matrix has ``P[perm[i], i] = 1`` so that ``P A P^T`` relabels A,
# i.e. rows index the target graph and columns the source graph.

Permutation = np.ndarray


def as_permutation(perm: Sequence[int], n: int | None = None) -> np.ndarray:
    p = np.asarray(perm, dtype=np.int64)
    if p.ndim != 1 or (n is not None and p.shape[0] != n):
        raise ValueError(f"permutation must have length {n}")
    if not np.array_equal(np.sort(p), np.arange(p.shape[0])):
        raise ValueError("not a bijection on {0..n-1}")
    return p


def perm_matrix(perm: Sequence[int]) -> np.ndarray:
    p = np.asarray(perm, dtype=np.int64)
    n = p.shape[0]
    P = np.zeros((n, n))
    P[p, np.arange(n)] = 1.0
    return P


def random_permutation(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n)


def apply_permutation(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel ``g`` so that ``B[perm[i], perm[j]] = A[i, j]``."""
    p = as_permutation(perm)
    if p.shape[0] != g.n:
        raise ValueError(f"permutation length {p.shape[0]} does not match n={g.n}")
    b = np.empty_like(g.adj)
    b[np.ix_(p, p)] = g.adj
    return Graph(b)


def choose_flip_pairs(n: int, count: int, seed: int) -> list[tuple[int, int]]:
    """Draw ``count`` distinct unordered vertex pairs from a seeded shuffle."""
    total = n * (n - 1) // 2
    if count < 0 or count > total:
        raise ValueError(f"cannot flip {count} pairs on {n} vertices ({total} pairs available)")
    iu, ju = np.triu_indices(n, 1)
    picked = np.random.default_rng(seed).permutation(total)[:count]
    return [(int(iu[k]), int(ju[k])) for k in picked]


def flip_edges(g: Graph, count: int, seed: int) -> Graph:
    """Toggle the adjacency of ``count`` distinct random vertex pairs."""
    a = g.adj.copy()
    for u, v in choose_flip_pairs(g.n, count, seed):
        a[u, v] = a[v, u] = 1 - a[u, v]
    return Graph(a)


def degree_sequence(g: Graph) -> tuple[int, ...]:
    return tuple(sorted(g.degrees().tolist()))


# ---------------------------------------------------------------------------
# graph6


def _encode_n(n: int) -> str:
    if n < 1 or n > GRAPH6_MAX_N:
        raise ValueError(f"graph6 supports 1 <= n <= {GRAPH6_MAX_N}, got {n}")
    if n <= 62:
        return chr(63 + n)
    return "~" + "".join(chr(63 + ((n >> s) & 0x3F)) for s in (12, 6, 0))


def _upper_triangle_colmajor(n: int) -> tuple[np.ndarray, np.ndarray]:
    # x(0,1), x(0,2), x(1,2), x(0,3), ...
    rows, cols = np.triu_indices(n, 1)
    order = np.lexsort((rows, cols))
    return rows[order], cols[order]


def write_graph6(g: Graph) -> str:
    """Encode ``g`` as a graph6 string (no header line, no trailing newline)."""
    n = g.n
    header = _encode_n(n)
    rows, cols = _upper_triangle_colmajor(n)
    bits = g.adj[rows, cols].astype(np.uint8)
    pad = (-bits.size) % 6
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    groups = bits.reshape(-1, 6)
    values = groups @ (1 << np.arange(5, -1, -1))
    return header + "".join(chr(63 + int(v)) for v in values)


def parse_graph6(text: str) -> Graph:
    """Decode a single graph6 line."""
    s = text.rstrip("\r\n")
    if s.startswith(">>graph6<<"):
        s = s[len(">>graph6<<"):]
    if not s:
        raise GraphFormatError("empty graph6 string")
    codes = [ord(c) for c in s]
    if any(c < 63 or c > 126 for c in codes):
        raise GraphFormatError("graph6 characters must lie in [63, 126]")
    if codes[0] == 126:
        if len(codes) >= 2 and codes[1] == 126:
            raise GraphFormatError("8-byte graph6 header (n > 258047) is not supported")
        if len(codes) < 4:
            raise GraphFormatError("truncated extended graph6 header")
        n = ((codes[1] - 63) << 12) | ((codes[2] - 63) << 6) | (codes[3] - 63)
        if n <= 62:
            raise GraphFormatError("extended header used for n <= 62")
        payload = codes[4:]
    else:
        n = codes[0] - 63
        payload = codes[1:]
    if n < 1:
        raise GraphFormatError("graph6 header encodes n=0")
    nbits = n * (n - 1) // 2
    need = -(-nbits // 6)
    if len(payload) < need:
        raise GraphFormatError(f"graph6 payload has {len(payload)} chars, need {need}")
    if len(payload) > need:
        raise GraphFormatError(f"graph6 payload has {len(payload)} chars, expected {need}")
    vals = np.array(payload, dtype=np.uint8) - 63
    bits = ((vals[:, None] >> np.arange(5, -1, -1)) & 1).reshape(-1)[:nbits]
    rows, cols = _upper_triangle_colmajor(n)
    a = np.zeros((n, n), dtype=np.int8)
    a[rows, cols] = bits
    a[cols, rows] = bits
    return Graph(a)


# ---------------------------------------------------------------------------
# edge list


def parse_edge_list(text: str) -> Graph:
    """Parse ``"n m"`` followed by ``m`` lines ``"u v"`` (0-based)."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise GraphFormatError("empty edge list")
    try:
        header = [int(t) for t in lines[0]]
        rows = [[int(t) for t in ln] for ln in lines[1:]]
    except ValueError as exc:
        raise GraphFormatError(f"non-integer token in edge list: {exc}") from None
    if len(header) != 2:
        raise GraphFormatError("edge list header must be 'n m'")
    n, m = header
    if n < 1 or m < 0:
        raise GraphFormatError(f"invalid header n={n} m={m}")
    if len(rows) != m:
        raise GraphFormatError(f"header announces {m} edges, found {len(rows)}")
    edges = []
    for r in rows:
        if len(r) != 2:
            raise GraphFormatError(f"edge line must have two vertices, got {r}")
        edges.append((r[0], r[1]))
    return Graph.from_edges(n, edges)


def write_edge_list(g: Graph) -> str:
    edges = g.edges()
    return "\n".join([f"{g.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]) + "\n"


def read_graph(path) -> Graph:
    """Read a graph file; ``.g6``/``.graph6`` are graph6, anything else an edge list."""
    p = Path(path)
    text = p.read_text()
    if p.suffix in (".g6", ".graph6"):
        first = next((ln for ln in text.splitlines() if ln.strip()), "")
        return parse_graph6(first)
    return parse_edge_list(text)
