import networkx as nx
import numpy as np
import pytest

from conftest import from_nx
from gifw.bnb import is_isomorphism
from gifw.graph import apply_permutation
from gifw.heuristics import DcConfig, merit, solve_dc


def test_identity_start_is_stationary(petersen):
    res = solve_dc(petersen, petersen, x0=np.eye(10))
    assert res.status == "isomorphic"
    assert list(res.permutation) == list(range(10))
    assert res.merits[0] == pytest.approx(-1e-2 * 10)


def test_lambda_must_be_positive():
    with pytest.raises(ValueError):
        DcConfig(lam=0.0)


def test_trees_mostly_solved_and_always_sound():
    hits = 0
    for seed in range(20):
        t = from_nx(nx.random_labeled_tree(8, seed=seed))
        B = apply_permutation(t, np.random.default_rng(seed).permutation(8))
        res = solve_dc(t, B, DcConfig(seed=seed))
        m = np.array(res.merits)
        assert (np.diff(m) <= 1e-9).all()
        assert np.allclose(res.X.sum(0), 1, atol=1e-8) and np.allclose(res.X.sum(1), 1, atol=1e-8)
        if res.status == "isomorphic":
            assert is_isomorphism(t, B, res.permutation)
            hits += 1
        else:
            assert res.permutation is None
    assert hits >= 10


def test_non_isomorphic_is_inconclusive(two_triangles, c6):
    for seed in range(5):
        assert solve_dc(two_triangles, c6, DcConfig(seed=seed)).status == "inconclusive"


def test_merit_formula(rng):
    A = rng.integers(0, 2, (4, 4))
    X = np.full((4, 4), 0.25)
    R = X @ A - A @ X
    assert merit(X, A, A, 0.5) == pytest.approx((R * R).sum() - 0.5 * (X * X).sum())
