"""Faces of the Birkhoff polytope and the face-restricted linear minimization oracle.

A face is described by a :class:`FixingMask`: every entry of the n x n
permutation variable is either free, fixed to zero, or fixed to one.  Fixing
an entry to one removes its row and column from the assignment problem;
fixing it to zero removes the corresponding bipartite edge.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, maximum_bipartite_matching

__all__ = [
    "FREE",
    "ONE",
    "ZERO",
    "FixConflict",
    "FixingMask",
    "InfeasibleMask",
    "Status",
    "barycenter",
    "fix_entry",
    "lmo",
    "mask_feasible",
    "perfect_matching_closure",
    "sinkhorn",
]


class Status(IntEnum):
    FREE = 0
    ZERO = 1
    ONE = 2


FREE, ZERO, ONE = Status.FREE, Status.ZERO, Status.ONE


class InfeasibleMask(Exception):
    """No permutation is consistent with the fixings."""


class FixConflict(ValueError):
    """A fix contradicts an existing fixing in the same row or column."""


class FixingMask:
    """Immutable per-entry fixing status of an n x n permutation variable.

    Masks are kept in normalized form: a ONE at ``(i, j)`` implies ZERO for
    every other entry of row ``i`` and column ``j``.
    """

    __slots__ = ("status",)

    def __init__(self, status):
        s = np.array(status, dtype=np.int8, copy=True)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError(f"mask must be square, got shape {s.shape}")
        if not np.isin(s, (FREE, ZERO, ONE)).all():
            raise ValueError("mask entries must be FREE, ZERO or ONE")
        ones = s == ONE
        if (ones.sum(axis=0) > 1).any() or (ones.sum(axis=1) > 1).any():
            raise FixConflict("more than one ONE in a row or column")
        s = _normalize(s)
        s.flags.writeable = False
        self.status = s

    @classmethod
    def free(cls, n: int) -> "FixingMask":
        return cls(np.zeros((n, n), dtype=np.int8))

    @classmethod
    def from_zeros(cls, zeros) -> "FixingMask":
        """Mask with ZERO wherever ``zeros`` is true and FREE elsewhere."""
        z = np.asarray(zeros, dtype=bool)
        return cls(np.where(z, ZERO, FREE).astype(np.int8))

    @property
    def n(self) -> int:
        return self.status.shape[0]

    @property
    def allowed(self) -> np.ndarray:
        """Boolean matrix of entries that may be one."""
        return self.status != ZERO

    @property
    def num_fixed(self) -> int:
        return int(np.count_nonzero(self.status != FREE))

    def one_rows_cols(self) -> tuple[np.ndarray, np.ndarray]:
        return np.nonzero(self.status == ONE)

    def is_leaf(self) -> bool:
        """True when every row has exactly one allowed entry (a single permutation)."""
        allowed = self.allowed
        return bool((allowed.sum(axis=1) == 1).all() and (allowed.sum(axis=0) == 1).all())

    def with_zeros(self, zeros) -> "FixingMask":
        """Return a copy with additional ZERO fixings (existing ONEs kept)."""
        s = self.status.copy()
        z = np.asarray(zeros, dtype=bool) & (s == FREE)
        s[z] = ZERO
        return FixingMask(s)

    def __eq__(self, other):
        if not isinstance(other, FixingMask):
            return NotImplemented
        return np.array_equal(self.status, other.status)

    def __hash__(self):
        return hash(self.status.tobytes())

    def __repr__(self):
        ones = int(np.count_nonzero(self.status == ONE))
        zeros = int(np.count_nonzero(self.status == ZERO))
        return f"FixingMask(n={self.n}, ones={ones}, zeros={zeros})"


def _normalize(s: np.ndarray) -> np.ndarray:
    rows, cols = np.nonzero(s == ONE)
    if rows.size:
        s[rows, :] = ZERO
        s[:, cols] = ZERO
        s[rows, cols] = ONE
    n = s.shape[0]
    if rows.size == n - 1:
        # the remaining 1 x 1 block is forced
        r = np.setdiff1d(np.arange(n), rows)
        c = np.setdiff1d(np.arange(n), cols)
        if s[r[0], c[0]] == FREE:
            s[r[0], c[0]] = ONE
    return s


def fix_entry(mask: FixingMask, i: int, j: int, value: Status) -> FixingMask:
    """Fix entry ``(i, j)`` to ZERO or ONE and return the normalized copy."""
    value = Status(value)
    if value == FREE:
        raise ValueError("can only fix to ZERO or ONE")
    cur = mask.status[i, j]
    if cur != FREE:
        if cur == value:
            return mask
        raise FixConflict(f"entry ({i}, {j}) is already fixed to {Status(cur).name}")
    s = mask.status.copy()
    if value == ONE:
        if (s[i, :] == ONE).any() or (s[:, j] == ONE).any():
            raise FixConflict(f"row {i} or column {j} already holds a ONE")
    s[i, j] = value
    return FixingMask(s)


def _allowed_csr(allowed: np.ndarray) -> csr_matrix:
    return csr_matrix(allowed.astype(np.int8))


def mask_feasible(mask: FixingMask) -> bool:
    """Whether some permutation avoids every ZERO (Hopcroft-Karp on allowed entries)."""
    allowed = mask.allowed
    if not allowed.any(axis=1).all() or not allowed.any(axis=0).all():
        return False
    match = maximum_bipartite_matching(_allowed_csr(allowed), perm_type="column")
    return bool((match >= 0).all())


def perfect_matching_closure(mask: FixingMask) -> FixingMask:
    """Fix to ZERO every allowed entry that lies on no perfect matching.

    Uses the Dulmage-Mendelsohn argument: with a perfect matching M, a
    non-matching edge (r, c) is on some perfect matching iff r and the row
    matched to c are strongly connected in the alternating digraph.
    """
    allowed = mask.allowed
    n = mask.n
    if not allowed.any(axis=1).all() or not allowed.any(axis=0).all():
        raise InfeasibleMask("a row or column has no allowed entry")
    row_of_col = maximum_bipartite_matching(_allowed_csr(allowed), perm_type="row")
    if (row_of_col < 0).any():
        raise InfeasibleMask("no perfect matching on the allowed entries")
    r, c = np.nonzero(allowed)
    target = row_of_col[c]
    keep = r != target
    graph = csr_matrix((np.ones(int(keep.sum())), (r[keep], target[keep])), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="strong")
    on_matching = (labels[r] == labels[target])
    drop = np.zeros((n, n), dtype=bool)
    drop[r[~on_matching], c[~on_matching]] = True
    if not drop.any():
        return mask
    return mask.with_zeros(drop)


def lmo(cost, mask: FixingMask | None = None) -> np.ndarray:
    """Permutation minimizing ``<P, cost>`` over the face given by ``mask``.

    Rows of ``cost`` index the target vertex and columns the source vertex,
    so the result ``perm`` has ``P[perm[c], c] = 1``.  ONE rows/columns are
    deleted and ZERO entries become forbidden arcs before solving the
    reduced assignment problem.  Ties follow scipy's deterministic order.

    Raises
    ------
    InfeasibleMask
        If no permutation is consistent with the mask.
    """
    C = np.asarray(cost, dtype=float)
    n = C.shape[0]
    if C.shape != (n, n):
        raise ValueError(f"cost must be square, got {C.shape}")
    if not np.isfinite(C).all():
        raise ValueError("cost entries must be finite")
    row_of_col = np.empty(n, dtype=np.int64)
    if mask is None or not mask.status.any():  # FREE == 0
        rows, cols = linear_sum_assignment(C)
        row_of_col[cols] = rows
        return row_of_col
    if mask.n != n:
        raise ValueError(f"mask dimension {mask.n} does not match cost {n}")
    s = mask.status
    one_r, one_c = np.nonzero(s == ONE)
    row_of_col[one_c] = one_r
    free_r = np.setdiff1d(np.arange(n), one_r)
    free_c = np.setdiff1d(np.arange(n), one_c)
    if free_r.size == 0:
        return row_of_col
    sub = C[np.ix_(free_r, free_c)].copy()
    sub[s[np.ix_(free_r, free_c)] == ZERO] = np.inf
    try:
        rows, cols = linear_sum_assignment(sub)
    except ValueError as exc:
        raise InfeasibleMask(str(exc)) from None
    row_of_col[free_c[cols]] = free_r[rows]
    return row_of_col


def sinkhorn(K: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Scale a nonnegative matrix with total support to be doubly stochastic."""
    X = np.array(K, dtype=float)
    for _ in range(max_iter):
        X /= X.sum(axis=1, keepdims=True)
        col = X.sum(axis=0)
        X /= col
        if np.abs(X.sum(axis=1) - 1.0).max() <= tol:
            break
    return X


def barycenter(mask: FixingMask | None = None, n: int | None = None, tol: float = 1e-10) -> np.ndarray:
    """A doubly stochastic point in the relative interior of the face.

    The indicator of entries lying on some perfect matching is Sinkhorn
    scaled on the block left after deleting ONE rows and columns; ONEs are
    exact and ZEROs are exactly zero.
    """
    if mask is None:
        return np.full((n, n), 1.0 / n)
    closed = perfect_matching_closure(mask)
    return face_point(closed, closed.allowed.astype(float), tol=tol)


def face_point(mask: FixingMask, weights: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Sinkhorn-scale ``weights`` restricted to a closed face into a face point.

    ``mask`` must already be closed under :func:`perfect_matching_closure`
    and ``weights`` must be positive on every allowed entry.
    """
    s = mask.status
    n = mask.n
    X = np.zeros((n, n))
    one_r, one_c = np.nonzero(s == ONE)
    X[one_r, one_c] = 1.0
    free_r = np.setdiff1d(np.arange(n), one_r)
    free_c = np.setdiff1d(np.arange(n), one_c)
    if free_r.size:
        block = np.where(s[np.ix_(free_r, free_c)] == ZERO, 0.0, weights[np.ix_(free_r, free_c)])
        X[np.ix_(free_r, free_c)] = sinkhorn(block, tol=tol)
    return X
