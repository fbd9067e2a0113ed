import time

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIG1_EDGES, trees
from spectree.degseq import (DegreeSequence, enumerate_tree_sequences, parse_degree_sequence,
                             spider_sequence)
from spectree.exceptions import InvalidSequenceError, InvalidTreeError
from spectree.oracle import enumerate_trees
from spectree.tree import (Tree, build_bfd_tree, canonical_code, has_bfd_ordering,
                           is_bfd_ordering, path_tree, prufer_decode, prufer_encode,
                           random_tree, read_edgelist, spider_legs, spider_tree, star_tree,
                           tree_centers)


def _nx(t: Tree) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(t.n))
    g.add_edges_from(t.edge_list())
    return g


# -- construction and validation ------------------------------------------------------


@pytest.mark.parametrize("n, edges", [
    (3, [(0, 1)]),                      # too few edges
    (3, [(0, 1), (1, 2), (0, 2)]),      # cycle
    (4, [(0, 1), (0, 1), (2, 3)]),      # repeated edge, disconnected
    (3, [(0, 3), (1, 2)]),              # label out of range
    (2, [(1, 1)]),                      # loop
])
def test_rejects_non_trees(n, edges):
    with pytest.raises(InvalidTreeError):
        Tree(n, edges)


def test_arrays_are_immutable(fig1):
    with pytest.raises(ValueError):
        fig1.edges[0, 0] = 5
    with pytest.raises(ValueError):
        fig1.degrees[0] = 1


def test_read_edgelist_comments_and_blank_lines():
    t = read_edgelist("# a path\n0 1\n\n1 2  # middle\n2 3\n")
    assert t == path_tree(4)
    with pytest.raises(InvalidTreeError):
        read_edgelist("0 1 2\n")
    with pytest.raises(InvalidTreeError):
        read_edgelist("0 x\n")


def test_edgelist_round_trip_is_byte_stable(fig1):
    text = fig1.to_edgelist()
    assert read_edgelist(text).to_edgelist() == text
    assert fig1.to_dot().startswith("graph T {")


def test_path_and_bipartition():
    t = path_tree(5)
    assert t.path(0, 4) == [0, 1, 2, 3, 4]
    assert t.path(3, 3) == [3]
    assert t.bipartition().tolist() == [1, -1, 1, -1, 1]


# -- BFD-trees --------------------------------------------------------------------------


def test_fig1_bfd_tree_edges(fig1):
    t = build_bfd_tree(parse_degree_sequence("4^2,3^4,2^3,1^10"))
    assert t.edge_list() == FIG1_EDGES
    assert t == fig1


def test_single_edge_and_single_vertex():
    assert build_bfd_tree(DegreeSequence([1, 1])).edge_list() == [(0, 1)]
    t = build_bfd_tree(DegreeSequence([0]))
    assert t.n == 1 and t.edge_list() == []


def test_bfd_rejects_non_tree_sequence():
    with pytest.raises(InvalidSequenceError):
        build_bfd_tree(DegreeSequence([2, 2, 2]))


@pytest.mark.parametrize("n, k", [(7, 3), (10, 4), (11, 3), (9, 8), (6, 2)])
def test_spider_sequence_gives_balanced_spider(n, k):
    legs = spider_legs(build_bfd_tree(spider_sequence(n, k)))
    assert sum(legs) == n - 1
    assert max(legs) - min(legs) <= 1
    if k > 2:
        assert len(legs) == k


def test_is_bfd_ordering_fig1(fig1):
    ident = np.arange(19)
    assert is_bfd_ordering(fig1, ident)
    swapped = ident.copy()
    swapped[[1, 4]] = swapped[[4, 1]]
    assert not is_bfd_ordering(fig1, swapped)


def test_is_bfd_ordering_edge_cases():
    edge = Tree(2, [(0, 1)])
    assert is_bfd_ordering(edge, [0, 1]) and is_bfd_ordering(edge, [1, 0])
    with pytest.raises(ValueError):
        is_bfd_ordering(edge, [0, 0])


def test_fig2_has_no_bfd_ordering(fig2):
    assert fig2.degree_sequence() == parse_degree_sequence("4^2,2,1^6")
    assert has_bfd_ordering(fig2) is None
    bfd = build_bfd_tree(fig2.degree_sequence())
    rank = has_bfd_ordering(bfd)
    assert rank is not None and is_bfd_ordering(bfd, rank)


def test_has_bfd_ordering_path_roots_at_center():
    rank = has_bfd_ordering(path_tree(3))
    assert int(np.argmin(rank)) == 1


def test_bfd_build_is_linear_time():
    n = 10**6
    rng = np.random.default_rng(0)
    counts = np.bincount(rng.integers(0, n, n - 2), minlength=n) + 1
    pi = DegreeSequence.from_sorted_array(np.sort(counts)[::-1])
    build_bfd_tree(pi)
    t0 = time.perf_counter()
    t = build_bfd_tree(pi)
    assert time.perf_counter() - t0 < 1.0
    assert t.n == n and int(t.degrees.sum()) == 2 * (n - 1)


# -- Pruefer codes and canonical forms ---------------------------------------------------------


def test_prufer_examples():
    assert prufer_decode([], 2).edge_list() == [(0, 1)]
    assert prufer_decode([0, 0]) == star_tree(4)
    assert prufer_decode([1, 2]) == path_tree(4)
    assert prufer_encode(Tree(2, [(0, 1)])) == []
    assert prufer_encode(star_tree(4)) == [0, 0]
    assert prufer_encode(path_tree(4)) == [1, 2]


def test_prufer_rejects_bad_labels():
    with pytest.raises(InvalidTreeError):
        prufer_decode([0, 4])


def test_canonical_code_examples():
    p = path_tree(3)
    assert canonical_code(p) == canonical_code(Tree(3, [(2, 0), (0, 1)]))
    assert canonical_code(star_tree(4)) != canonical_code(path_tree(4))
    assert canonical_code(prufer_decode([1, 2])) == canonical_code(prufer_decode([2, 1]))


def test_spider_helpers():
    assert spider_legs(spider_tree([3, 1, 2])) == [1, 2, 3]
    assert spider_legs(path_tree(6)) == [2, 3]
    assert spider_legs(build_bfd_tree(parse_degree_sequence("3^2,1^4"))) is None
    assert tree_centers(path_tree(4)) == [1, 2]


def test_unlabeled_counts_match_networkx():
    # number of non-isomorphic trees on n vertices (OEIS A000055)
    expected = {1: 1, 2: 1, 3: 1, 4: 2, 5: 3, 6: 6, 7: 11, 8: 23, 9: 47}
    for n, count in expected.items():
        if n == 1:
            continue
        codes = set()
        for s in enumerate_tree_sequences(n):
            codes |= {canonical_code(t) for t in enumerate_trees(s, dedupe=True)}
        assert len(codes) == count
        assert count == sum(1 for _ in nx.nonisomorphic_trees(n))


# -- properties ---------------------------------------------------------------------


@given(trees(min_n=2))
def test_prufer_round_trip(t):
    assert prufer_decode(prufer_encode(t), t.n) == t


@given(trees(min_n=3))
def test_prufer_degree_count(t):
    code = prufer_encode(t)
    assert (np.bincount(code, minlength=t.n) + 1).tolist() == t.degrees.tolist()


@given(trees(), st.randoms(use_true_random=False))
def test_canonical_code_is_relabel_invariant(t, r):
    perm = list(range(t.n))
    r.shuffle(perm)
    assert canonical_code(t.relabel(perm)) == canonical_code(t)


@given(trees(max_n=12), trees(max_n=12))
@settings(max_examples=300)
def test_canonical_code_decides_isomorphism(a, b):
    same = a.n == b.n and nx.is_isomorphic(_nx(a), _nx(b))
    assert (canonical_code(a) == canonical_code(b)) == same


@given(st.integers(2, 16).flatmap(lambda n: st.sampled_from(enumerate_tree_sequences(n))))
def test_bfd_tree_realizes_and_orders(pi):
    t = build_bfd_tree(pi)
    assert t.degree_sequence() == pi
    assert nx.is_tree(_nx(t))
    assert is_bfd_ordering(t, np.arange(t.n))
    assert has_bfd_ordering(t) is not None


@given(st.integers(3, 14).flatmap(lambda n: st.sampled_from(enumerate_tree_sequences(n))),
       st.randoms(use_true_random=False))
def test_bfd_tree_unique_up_to_isomorphism(pi, r):
    # any tree admitting a BFD-ordering with these degrees is isomorphic to BFD(pi)
    t = build_bfd_tree(pi)
    perm = list(range(t.n))
    r.shuffle(perm)
    u = t.relabel(perm)
    rank = has_bfd_ordering(u)
    assert rank is not None and is_bfd_ordering(u, rank)
    assert canonical_code(u) == canonical_code(t)


@given(trees(min_n=2, max_n=20))
def test_has_bfd_ordering_witness_is_valid(t):
    rank = has_bfd_ordering(t)
    if rank is not None:
        assert is_bfd_ordering(t, rank)
        assert canonical_code(t) == canonical_code(build_bfd_tree(t.degree_sequence()))


def test_random_tree_is_reproducible():
    a = random_tree(50, np.random.default_rng(3))
    b = random_tree(50, np.random.default_rng(3))
    assert a == b
