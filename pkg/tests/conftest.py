import numpy as np
import pytest
from hypothesis import strategies as st

from spectree.tree import Tree, prufer_decode

# BFD-tree drawn for the sequence 4^2,3^4,2^3,1^10
FIG1_EDGES = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 5), (1, 6), (1, 7), (2, 8), (2, 9),
              (3, 10), (3, 11), (4, 12), (4, 13), (5, 14), (5, 15), (6, 16), (7, 17),
              (8, 18)]

# a degree-2 vertex joining two degree-4 vertices with three leaves each;
# same sequence as a BFD-tree but no BFD-ordering exists
FIG2_EDGES = [(0, 1), (0, 2), (1, 3), (1, 4), (1, 5), (2, 6), (2, 7), (2, 8)]


@pytest.fixture
def fig1():
    return Tree(19, FIG1_EDGES)


@pytest.fixture
def fig2():
    return Tree(9, FIG2_EDGES)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@st.composite
def trees(draw, min_n=1, max_n=30):
    """Uniform labeled trees through their Pruefer codes."""
    n = draw(st.integers(min_n, max_n))
    if n == 1:
        return Tree(1, np.empty((0, 2), dtype=np.int64))
    if n == 2:
        return Tree(2, [(0, 1)])
    code = draw(st.lists(st.integers(0, n - 1), min_size=n - 2, max_size=n - 2))
    return prufer_decode(code, n)
