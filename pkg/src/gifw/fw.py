"""Objective, gradient and Frank-Wolfe solvers over faces of the Birkhoff polytope.

The objective is ``f(X) = ||XA - BX||_F^2 + <C, X> + c`` where the optional
linear term ``C`` and constant ``c`` serve the bound-tightening and
difference-of-convex subproblems.  All solvers use exact line search, which
is available in closed form because ``f`` is quadratic.

Rows of ``X`` index the vertices of ``B`` and columns the vertices of ``A``;
a permutation ``perm`` is the matrix with ``P[perm[c], c] = 1``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .birkhoff import FREE, ONE, ZERO, FixingMask, InfeasibleMask, barycenter, lmo
from .graph import Graph

__all__ = [
    "DegenerateSupport",
    "FwConfig",
    "FwState",
    "Objective",
    "RateConstants",
    "birkhoff_decompose",
    "exact_step",
    "fw_gap",
    "gradient",
    "objective",
    "prop1_bound",
    "secant_step",
    "solve",
    "solve_bpcg",
    "solve_dicg",
    "solve_fw",
]


class DegenerateSupport(Exception):
    """The support of the iterate admits no permutation (numerical dust)."""


def _as_matrix(g) -> np.ndarray:
    if isinstance(g, Graph):
        return g.adj.astype(float)
    return np.asarray(g, dtype=float)


def _check_dims(X, A, B):
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n) or X.shape != (n, n):
        raise ValueError(f"dimension mismatch: X{X.shape}, A{A.shape}, B{B.shape}")


def objective(X, A, B) -> float:
    """``||XA - BX||_F^2``."""
    X, A, B = np.asarray(X, dtype=float), _as_matrix(A), _as_matrix(B)
    _check_dims(X, A, B)
    R = X @ A - B @ X
    return float(np.vdot(R, R))


def gradient(X, A, B) -> np.ndarray:
    """Frobenius gradient ``2 R A^T - 2 B^T R`` with ``R = XA - BX``."""
    X, A, B = np.asarray(X, dtype=float), _as_matrix(A), _as_matrix(B)
    _check_dims(X, A, B)
    R = X @ A - B @ X
    return 2.0 * (R @ A.T - B.T @ R)


class Objective:
    """Quadratic GI objective with an optional linear term.

    Parameters
    ----------
    A, B : Graph or array_like
        Adjacency matrices; the residual is ``XA - BX``.
    linear : array_like, optional
        Matrix ``C`` of the linear term ``<C, X>``.
    constant : float
        Additive constant.
    """

    def __init__(self, A, B, linear=None, constant: float = 0.0):
        self.A = _as_matrix(A)
        self.B = _as_matrix(B)
        self.n = self.A.shape[0]
        if self.B.shape != self.A.shape:
            raise ValueError(f"dimension mismatch: A{self.A.shape}, B{self.B.shape}")
        self.C = None if linear is None else np.asarray(linear, dtype=float)
        self.constant = float(constant)
        self._AT = np.ascontiguousarray(self.A.T)
        self._BT = np.ascontiguousarray(self.B.T)

    def residual(self, X) -> np.ndarray:
        return X @ self.A - self.B @ X

    def vertex_residual(self, perm) -> np.ndarray:
        """Residual of a permutation matrix without forming it."""
        inv = np.empty_like(perm)
        inv[perm] = np.arange(perm.shape[0])
        return self.A[inv, :] - self.B[:, perm]

    def value_from(self, R, X) -> float:
        v = float(np.vdot(R, R)) + self.constant
        if self.C is not None:
            v += float(np.vdot(self.C, X))
        return v

    def value(self, X) -> float:
        return self.value_from(self.residual(X), X)

    def grad_from(self, R) -> np.ndarray:
        g = 2.0 * (R @ self._AT - self._BT @ R)
        if self.C is not None:
            g += self.C
        return g

    def gradient(self, X) -> np.ndarray:
        return self.grad_from(self.residual(X))


def _line_min(slope: float, curvature: float, gamma_max: float) -> float:
    # minimize -slope*g + curvature*g^2 over [0, gamma_max]
    if slope <= 0.0:
        return 0.0
    if curvature <= 0.0:
        return gamma_max
    return min(slope / (2.0 * curvature), gamma_max)


def exact_step(X, direction, A, B, gamma_max: float = 1.0, linear=None) -> float:
    """Exact line search for ``f(X - gamma * direction)`` on ``[0, gamma_max]``.

    Returns ``<grad f(X), d> / (2 ||dA - Bd||^2)`` clamped to the interval.
    """
    obj = Objective(A, B, linear)
    X = np.asarray(X, dtype=float)
    d = np.asarray(direction, dtype=float)
    slope = float(np.vdot(obj.gradient(X), d))
    DA = obj.residual(d)
    return _line_min(slope, float(np.vdot(DA, DA)), gamma_max)


def secant_step(X, direction, A, B, gamma_max: float = 1.0, linear=None) -> float:
    """Secant root of the directional derivative from gradients at ``gamma = 0, 1``.

    On a quadratic the derivative is affine, so one secant step is exact.
    """
    obj = Objective(A, B, linear)
    X = np.asarray(X, dtype=float)
    d = np.asarray(direction, dtype=float)
    d0 = -float(np.vdot(obj.gradient(X), d))
    d1 = -float(np.vdot(obj.gradient(X - d), d))
    if d0 >= 0.0:
        return 0.0
    if d1 <= d0:
        return gamma_max
    return min(d0 / (d0 - d1), gamma_max)


def fw_gap(X, grad, mask: FixingMask | None = None) -> float:
    """``<grad, X - V>`` for the face-restricted LMO vertex ``V``, clamped at 0."""
    grad = np.asarray(grad, dtype=float)
    v = lmo(grad, mask)
    return max(float(np.vdot(grad, X)) - _vertex_dot(grad, v), 0.0)


def _vertex_dot(M, perm) -> float:
    return float(M[perm, np.arange(perm.shape[0])].sum())


@dataclass(frozen=True)
class RateConstants:
    """Constants entering the linear rate of BPCG on the GI objective."""

    L: float
    D: float
    delta: float
    M: float = 1.0

    @classmethod
    def from_norms(cls, n: int, normA: float, normB: float) -> "RateConstants":
        return cls(L=2.0 * (normA + normB) ** 2, D=math.sqrt(2 * n), delta=1.0 / n)

    @classmethod
    def from_graphs(cls, A, B) -> "RateConstants":
        A, B = _as_matrix(A), _as_matrix(B)
        return cls.from_norms(A.shape[0], float(np.linalg.norm(A)), float(np.linalg.norm(B)))

    def bound(self, t: int) -> float:
        """``(1 - delta^2 / (2 M^2 L D^2))^ceil((t-1)/2) * L D^2 / 2``."""
        k = math.ceil((t - 1) / 2) if t > 0 else 0
        rate = 1.0 - self.delta**2 / (2.0 * self.M**2 * self.L * self.D**2)
        return rate**k * self.L * self.D**2 / 2.0


def prop1_bound(n: int, mA: int, mB: int, t: int, form: str | None = None) -> float:
    """Upper bound on ``f(X_t) - f*`` along BPCG iterations.

    ``mA`` and ``mB`` count adjacency nonzeros (``2|E|`` for undirected
    graphs).  The ``"specialized"`` form ``8mn(1 - 1/(16 n^3 m^2))^k`` applies
    to equal edge counts and is the default then; otherwise the ``"general"``
    form built from :class:`RateConstants` is used.
    """
    if t < 0:
        raise ValueError("iteration index must be nonnegative")
    if form is None:
        form = "specialized" if mA == mB else "general"
    k = math.ceil((t - 1) / 2) if t > 0 else 0
    if form == "specialized":
        if mA != mB:
            raise ValueError("specialized bound needs equal edge counts")
        m = mA
        if m == 0:
            return 0.0
        return 8.0 * m * n * (1.0 - 1.0 / (16.0 * n**3 * m**2)) ** k
    if form == "general":
        if mA == 0 and mB == 0:
            return 0.0
        return RateConstants.from_norms(n, math.sqrt(mA), math.sqrt(mB)).bound(t)
    raise ValueError(f"unknown form {form!r}")


@dataclass
class FwConfig:
    """Per-solve settings shared by all Frank-Wolfe variants."""

    max_iters: int = 5000
    gap_tol: float = 1e-7
    zero_tol: float = 1e-8
    # stop as soon as the dual bound exceeds this value (node can be pruned)
    cutoff: Optional[float] = None
    support_tol: float = 1e-12
    step: str = "exact"  # or "agnostic" (2/(t+2), debugging only)
    record_history: bool = False
    refresh_every: int = 200


@dataclass
class FwState:
    X: np.ndarray
    primal: float
    gap: float
    dual_bound: float
    iters: int
    grad: np.ndarray
    reason: str = ""
    active_set: Optional[list] = None
    lmo_calls: int = 0
    history: list = field(default_factory=list)


VertexCallback = Callable[[np.ndarray], bool]


class _Run:
    """Bookkeeping shared by the solver loops."""

    def __init__(self, obj: Objective, mask, cfg: FwConfig, on_vertex, deadline):
        self.obj = obj
        self.mask = mask
        self.cfg = cfg
        self.on_vertex = on_vertex
        self.deadline = deadline
        self.dual = -math.inf
        self.lmo_calls = 0
        self.history: list[float] = []
        self.cols = np.arange(obj.n)
        self._lmo_mask = mask if mask.num_fixed else None

    def fw_vertex(self, grad):
        v = lmo(grad, self._lmo_mask)
        self.lmo_calls += 1
        return v

    def check(self, it, primal, gap, v) -> str:
        """Return a stop reason or ``""``."""
        cfg = self.cfg
        if self.on_vertex is not None and self.on_vertex(v):
            return "incumbent"
        self.dual = max(self.dual, primal - gap)
        if cfg.record_history:
            self.history.append(primal)
        if gap <= cfg.gap_tol:
            return "gap"
        if primal <= cfg.zero_tol:
            return "zero"
        if cfg.cutoff is not None and self.dual > cfg.cutoff:
            return "cutoff"
        if it >= cfg.max_iters:
            return "max_iters"
        if self.deadline is not None and time.perf_counter() > self.deadline:
            return "time"
        return ""

    def gamma(self, it, slope, DA, gamma_max) -> float:
        if self.cfg.step == "agnostic":
            return min(2.0 / (it + 2.0), gamma_max) if slope > 0 else 0.0
        return _line_min(slope, float(np.vdot(DA, DA)), gamma_max)

    def state(self, X, primal, gap, it, grad, reason, active=None) -> FwState:
        return FwState(
            X=X, primal=primal, gap=gap, dual_bound=self.dual, iters=it, grad=grad,
            reason=reason, active_set=active, lmo_calls=self.lmo_calls, history=self.history,
        )


def _setup(A, B, mask, config, linear, constant, x0):
    obj = Objective(A, B, linear, constant)
    if mask is None:
        mask = FixingMask.free(obj.n)
    cfg = config or FwConfig()
    X = barycenter(mask) if x0 is None else np.array(x0, dtype=float)
    return obj, mask, cfg, X


def solve_fw(A, B, mask: FixingMask | None = None, config: FwConfig | None = None, *,
             linear=None, constant: float = 0.0, x0=None,
             on_vertex: VertexCallback | None = None, deadline: float | None = None) -> FwState:
    """Vanilla Frank-Wolfe with exact line search, started at the face barycenter.

    Every LMO vertex is passed to ``on_vertex``; a true return value stops
    the solve with reason ``"incumbent"``.
    """
    obj, mask, cfg, X = _setup(A, B, mask, config, linear, constant, x0)
    run = _Run(obj, mask, cfg, on_vertex, deadline)
    R = obj.residual(X)
    primal = obj.value_from(R, X)
    it = 0
    while True:
        grad = obj.grad_from(R)
        v = run.fw_vertex(grad)
        gap = max(float(np.vdot(grad, X)) - _vertex_dot(grad, v), 0.0)
        reason = run.check(it, primal, gap, v)
        if reason:
            return run.state(X, primal, gap, it, grad, reason)
        # direction X - V
        DA = R - obj.vertex_residual(v)
        slope = gap
        g = run.gamma(it, slope, DA, 1.0)
        X *= 1.0 - g
        X[v, run.cols] += g
        R -= g * DA
        it += 1
        if it % cfg.refresh_every == 0:
            R = obj.residual(X)
        primal = obj.value_from(R, X)


def solve_dicg(A, B, mask: FixingMask | None = None, config: FwConfig | None = None, *,
               linear=None, constant: float = 0.0, x0=None,
               on_vertex: VertexCallback | None = None, deadline: float | None = None) -> FwState:
    """Decomposition-invariant conditional gradient.

    The away vertex maximizes ``<grad, V>`` over permutations supported on
    entries of ``X`` above ``support_tol``; the pairwise step toward the FW
    vertex is capped by the smallest entry the away vertex gives up.  When
    the support admits no permutation a plain FW step is taken instead.
    """
    obj, mask, cfg, X = _setup(A, B, mask, config, linear, constant, x0)
    run = _Run(obj, mask, cfg, on_vertex, deadline)
    cols = run.cols
    R = obj.residual(X)
    primal = obj.value_from(R, X)
    it = 0
    while True:
        grad = obj.grad_from(R)
        v = run.fw_vertex(grad)
        gap = max(float(np.vdot(grad, X)) - _vertex_dot(grad, v), 0.0)
        reason = run.check(it, primal, gap, v)
        if reason:
            return run.state(X, primal, gap, it, grad, reason)
        try:
            a = _away_vertex(grad, X, mask, cfg.support_tol)
            run.lmo_calls += 1
        except DegenerateSupport:
            a = None
        if a is None:
            DA = R - obj.vertex_residual(v)
            g = run.gamma(it, gap, DA, 1.0)
            X *= 1.0 - g
            X[v, cols] += g
        else:
            moved = a != v
            if not moved.any():
                return run.state(X, primal, 0.0, it, grad, "gap")
            gamma_max = float(X[a[moved], cols[moved]].min())
            slope = _vertex_dot(grad, a) - _vertex_dot(grad, v)
            DA = obj.vertex_residual(a) - obj.vertex_residual(v)
            g = run.gamma(it, slope, DA, gamma_max)
            X[a, cols] -= g
            X[v, cols] += g
            if g == gamma_max:
                # exact zero on the dropped entries
                hit = moved & (X[a, cols] <= 0.0)
                X[a[hit], cols[hit]] = 0.0
        R -= g * DA
        it += 1
        if it % cfg.refresh_every == 0:
            R = obj.residual(X)
        primal = obj.value_from(R, X)


def _away_vertex(grad, X, mask: FixingMask, support_tol: float) -> np.ndarray:
    support = X > support_tol
    status = mask.status
    n = X.shape[0]
    free_r = ~(status == ONE).any(axis=1)
    free_c = ~(status == ONE).any(axis=0)
    out = np.empty(n, dtype=np.int64)
    one_r, one_c = np.nonzero(status == ONE)
    out[one_c] = one_r
    fr, fc = np.flatnonzero(free_r), np.flatnonzero(free_c)
    if fr.size == 0:
        return out
    sub = -grad[np.ix_(fr, fc)]
    sub = np.where(support[np.ix_(fr, fc)], sub, np.inf)
    try:
        rows, cc = linear_sum_assignment(sub)
    except ValueError:
        raise DegenerateSupport("iterate support contains no permutation") from None
    out[fc[cc]] = fr[rows]
    return out


def birkhoff_decompose(X, tol: float = 1e-12, max_terms: int | None = None) -> list[tuple[np.ndarray, float]]:
    """Greedy Birkhoff-von Neumann decomposition of a doubly stochastic matrix.

    Each round takes a maximum-weight permutation inside the remaining
    support and peels off its smallest entry.  Weights are renormalized to
    sum to one.
    """
    Y = np.array(X, dtype=float)
    n = Y.shape[0]
    cols = np.arange(n)
    max_terms = max_terms or n * n
    terms: list[tuple[np.ndarray, float]] = []
    while len(terms) < max_terms and Y.max() > tol:
        cost = np.where(Y > tol, -Y, np.inf)
        try:
            rows, cc = linear_sum_assignment(cost)
        except ValueError:
            break
        perm = np.empty(n, dtype=np.int64)
        perm[cc] = rows
        w = float(Y[perm, cols].min())
        if w <= tol:
            break
        Y[perm, cols] -= w
        terms.append((perm, w))
    total = sum(w for _, w in terms)
    return [(p, w / total) for p, w in terms]


def _compose(active: list[np.ndarray], weights: np.ndarray, n: int) -> np.ndarray:
    X = np.zeros((n, n))
    cols = np.arange(n)
    for p, w in zip(active, weights):
        X[p, cols] += w
    return X


def solve_bpcg(A, B, mask: FixingMask | None = None, config: FwConfig | None = None, *,
               linear=None, constant: float = 0.0, x0=None, active_set=None,
               on_vertex: VertexCallback | None = None, deadline: float | None = None) -> FwState:
    """Blended pairwise conditional gradient with an explicit active set.

    The starting point (barycenter by default) is decomposed into vertices
    unless ``active_set`` (list of ``(perm, weight)``) is given.  Pairwise
    steps move weight from the away vertex to the local FW vertex and drop
    vertices whose weight reaches zero; otherwise a global FW step is taken.
    """
    obj = Objective(A, B, linear, constant)
    n = obj.n
    mask = mask if mask is not None else FixingMask.free(n)
    cfg = config or FwConfig()
    if active_set is None:
        start = barycenter(mask) if x0 is None else np.asarray(x0, dtype=float)
        active_set = birkhoff_decompose(start)
    verts = [np.asarray(p, dtype=np.int64) for p, _ in active_set]
    weights = np.array([w for _, w in active_set], dtype=float)
    weights /= weights.sum()
    X = _compose(verts, weights, n)
    run = _Run(obj, mask, cfg, on_vertex, deadline)
    cols = run.cols
    R = obj.residual(X)
    primal = obj.value_from(R, X)
    it = 0
    while True:
        grad = obj.grad_from(R)
        scores = np.array([_vertex_dot(grad, p) for p in verts])
        ia, il = int(np.argmax(scores)), int(np.argmin(scores))
        w = run.fw_vertex(grad)
        gx = float(np.vdot(grad, X))
        gap = max(gx - _vertex_dot(grad, w), 0.0)
        reason = run.check(it, primal, gap, w)
        if reason:
            return run.state(X, primal, gap, it, grad, reason, list(zip(verts, weights.tolist())))
        if scores[ia] - scores[il] >= gap:
            a, s = verts[ia], verts[il]
            gamma_max = float(weights[ia])
            DA = obj.vertex_residual(a) - obj.vertex_residual(s)
            g = run.gamma(it, float(scores[ia] - scores[il]), DA, gamma_max)
            X[a, cols] -= g
            X[s, cols] += g
            weights[il] += g
            if g >= gamma_max:
                del verts[ia]
                weights = np.delete(weights, ia)
            else:
                weights[ia] -= g
        else:
            DA = R - obj.vertex_residual(w)
            g = run.gamma(it, gap, DA, 1.0)
            X *= 1.0 - g
            X[w, cols] += g
            if g >= 1.0:
                verts, weights = [w], np.array([1.0])
            else:
                weights *= 1.0 - g
                for k, p in enumerate(verts):
                    if np.array_equal(p, w):
                        weights[k] += g
                        break
                else:
                    verts.append(w)
                    weights = np.append(weights, g)
        R -= g * DA
        it += 1
        if it % cfg.refresh_every == 0:
            weights = np.clip(weights, 0.0, None)
            weights /= weights.sum()
            X = _compose(verts, weights, n)
            R = obj.residual(X)
        primal = obj.value_from(R, X)


SOLVERS = {"fw": solve_fw, "bpcg": solve_bpcg, "dicg": solve_dicg}


def solve(variant: str, A, B, mask=None, config=None, **kwargs) -> FwState:
    try:
        fn = SOLVERS[variant]
    except KeyError:
        raise ValueError(f"unknown FW variant {variant!r}; choose from {sorted(SOLVERS)}") from None
    return fn(A, B, mask, config, **kwargs)
