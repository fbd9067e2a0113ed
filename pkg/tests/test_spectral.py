import json
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings

from conftest import trees
from spectree.degseq import parse_degree_sequence
from spectree.exceptions import ConvergenceError, InvalidTreeError
from spectree.spectral import (SpectralResult, check_sign_structure, dense_max_eigenpair,
                               dense_max_eigenvalue, eigen_residual, laplacian_apply,
                               laplacian_matrix, max_laplacian_eigenpair, rayleigh_quotient,
                               ritz_lower_bound)
from spectree.tree import Tree, build_bfd_tree, path_tree, random_tree, star_tree

SQ2 = math.sqrt(2.0)


def test_laplacian_apply_examples():
    assert laplacian_apply(Tree(2, [(0, 1)]), [1, -1]).tolist() == [2, -2]
    assert laplacian_apply(star_tree(4), [3, -1, -1, -1]).tolist() == [12, -4, -4, -4]
    assert not laplacian_apply(path_tree(7), np.ones(7)).any()


def test_laplacian_matrix_matches_networkx(fig1):
    g = nx.Graph(fig1.edge_list())
    ref = nx.laplacian_matrix(g, nodelist=range(fig1.n)).toarray()
    assert np.array_equal(laplacian_matrix(fig1), ref)


def test_rayleigh_quotient_examples():
    assert rayleigh_quotient(Tree(2, [(0, 1)]), [1, -1]) == 2
    assert rayleigh_quotient(star_tree(4), [3, -1, -1, -1]) == pytest.approx(4.0, abs=1e-15)
    with pytest.raises(ValueError):
        rayleigh_quotient(path_tree(3), [0, 0, 0])


@given(trees(min_n=2, max_n=25))
def test_rayleigh_of_indicator_is_degree(t):
    for v in range(t.n):
        e = np.zeros(t.n)
        e[v] = 1.0
        assert rayleigh_quotient(t, e) == t.degree(v)


@pytest.mark.parametrize("t, lam", [
    (star_tree(5), 5.0),
    (Tree(2, [(0, 1)]), 2.0),
    (path_tree(4), 2 + SQ2),                  # 4 sin^2(3 pi / 8)
    (path_tree(9), 4 * math.sin(8 * math.pi / 18) ** 2),
])
def test_known_spectra(t, lam):
    for method in ("auto", "dense", "lanczos", "bisection"):
        res = max_laplacian_eigenpair(t, method=method)
        assert res.lam == pytest.approx(lam, rel=1e-12, abs=1e-12), method
        assert res.residual <= 1e-10 * lam


def test_eigen_residual_examples():
    p2 = Tree(2, [(0, 1)])
    assert eigen_residual(p2, 2.0, [1 / SQ2, -1 / SQ2]) == pytest.approx(0.0, abs=1e-15)
    assert eigen_residual(p2, 2.0, [1.0, 0.0]) == pytest.approx(SQ2, rel=1e-15)
    f = np.array([3, -1, -1, -1]) / math.sqrt(12)
    assert eigen_residual(star_tree(4), 4.0, f) == pytest.approx(0.0, abs=1e-15)


def test_sign_structure_examples():
    assert check_sign_structure(Tree(2, [(0, 1)]), np.array([1, -1]) / SQ2)
    assert check_sign_structure(star_tree(4), np.array([3, -1, -1, -1]) / math.sqrt(12))
    # eigenvector of the middle eigenvalue of P_3: zero at the center
    assert not check_sign_structure(path_tree(3), np.array([1, 0, -1]) / SQ2)
    # a genuinely wrong sign is caught; a sign flip of the whole vector is not a failure
    assert not check_sign_structure(path_tree(3), [1.0, -1.0, -0.5])
    assert check_sign_structure(path_tree(3), [-1.0, 2.0, -1.0])


def test_dense_examples(fig1):
    assert dense_max_eigenvalue(Tree(2, [(0, 1)])) == pytest.approx(2.0)
    assert dense_max_eigenvalue(star_tree(5)) == pytest.approx(5.0)
    lam = max_laplacian_eigenpair(fig1, method="iterative").lam
    assert abs(dense_max_eigenvalue(fig1) - lam) <= 1e-9
    with pytest.raises(InvalidTreeError):
        dense_max_eigenvalue(path_tree(30), cap=20)


def test_single_vertex_is_degenerate():
    res = max_laplacian_eigenpair(Tree(1, np.empty((0, 2), dtype=int)))
    assert res.lam == 0.0 and res.eigenvector.tolist() == [1.0]


def test_result_serialization(fig1):
    res = max_laplacian_eigenpair(fig1)
    d = json.loads(res.to_json(eigenvector=True))
    assert set(d) == {"lambda", "residual", "iterations", "method", "solver", "eigenvector"}
    assert d["lambda"] == res.lam
    assert isinstance(res, SpectralResult) and res.converged


def test_rejects_bad_arguments(fig1):
    with pytest.raises(ValueError):
        max_laplacian_eigenpair(fig1, tol=0)
    with pytest.raises(ValueError):
        max_laplacian_eigenpair(fig1, method="power")


def test_lanczos_cap_raises_with_partial_result():
    t = path_tree(3000)
    with pytest.raises(ConvergenceError) as info:
        max_laplacian_eigenpair(t, method="lanczos", max_iter=30)
    assert info.value.result is not None and not info.value.result.converged


def test_iterative_on_path_like_bfd_tree():
    # clustered top of the spectrum: Lanczos stalls and the bisection route takes over
    t = path_tree(20000)
    res = max_laplacian_eigenpair(t, method="iterative")
    assert res.lam == pytest.approx(4 * math.sin((19999) * math.pi / 40000) ** 2, rel=1e-12)
    assert res.residual <= 1e-10 * res.lam
    assert check_sign_structure(t, res.eigenvector)


def test_ritz_bound_is_below_lambda(rng):
    for _ in range(50):
        t = random_tree(int(rng.integers(2, 40)), rng)
        f = rng.standard_normal(t.n)
        assert ritz_lower_bound(t, f) <= dense_max_eigenvalue(t) + 1e-12
        lam, v = dense_max_eigenpair(t)
        assert ritz_lower_bound(t, v) == pytest.approx(lam, rel=1e-12)


# -- properties ---------------------------------------------------------------------


@given(trees(min_n=2, max_n=40))
@settings(max_examples=150)
def test_solver_agrees_with_dense(t):
    ref = dense_max_eigenvalue(t)
    for method in ("dense", "lanczos", "bisection"):
        res = max_laplacian_eigenpair(t, method=method)
        assert abs(res.lam - ref) <= 1e-9 * ref
        assert res.residual <= 1e-10 * res.lam
        assert check_sign_structure(t, res.eigenvector)
        assert np.linalg.norm(res.eigenvector) == pytest.approx(1.0)


@given(trees(min_n=2, max_n=40))
def test_rayleigh_bounded_by_lambda(t):
    lam = dense_max_eigenvalue(t)
    rng = np.random.default_rng(t.n)
    for _ in range(5):
        assert rayleigh_quotient(t, rng.standard_normal(t.n)) <= lam + 1e-12


@given(trees(min_n=2, max_n=40))
def test_lambda_bounds(t):
    # max degree + 1 <= lambda <= max over edges of d(u) + d(v)
    lam = dense_max_eigenvalue(t)
    d = t.degrees
    assert d.max() + 1 - 1e-12 <= lam
    assert lam <= max(d[u] + d[v] for u, v in t.edge_list()) + 1e-12


def test_bfd_start_vector_is_deterministic():
    t = build_bfd_tree(parse_degree_sequence("5^3,3^10,2^20,1^21"))
    a = max_laplacian_eigenpair(t, method="iterative")
    b = max_laplacian_eigenpair(t, method="iterative")
    assert a.lam == b.lam and np.array_equal(a.eigenvector, b.eigenvector)
