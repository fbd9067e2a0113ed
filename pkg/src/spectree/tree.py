"""Trees on dense 0-based vertex indices, BFD-trees, Pruefer codes, canonical forms.

A *BFD-ordering* of a rooted tree is a breadth-first well-ordering in which the
children of an earlier vertex come before the children of a later one, and
vertex degrees never increase along the order. ``build_bfd_tree`` realizes a
sorted tree sequence so that the identity ordering ``0, 1, ..., n-1`` is such
an ordering.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .degseq import DegreeSequence, is_tree_sequence
from .exceptions import InvalidSequenceError, InvalidTreeError

__all__ = [
    "Tree",
    "build_bfd_tree",
    "is_bfd_ordering",
    "has_bfd_ordering",
    "prufer_decode",
    "prufer_encode",
    "canonical_code",
    "rooted_canonical_code",
    "tree_centers",
    "path_tree",
    "star_tree",
    "spider_tree",
    "spider_legs",
    "random_tree",
    "read_edgelist",
]


class Tree:
    """An immutable tree on vertices ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : array_like, shape (n-1, 2)
        Undirected edges.
    root, parent, bfs_position : optional
        Rooting data. ``parent[root] == -1``; ``bfs_position[v]`` is the rank of
        ``v`` in some breadth-first well-ordering starting at ``root``.
    check : bool
        Validate that ``edges`` form a spanning tree. Internal constructors that
        produce trees by design pass ``False``.
    """

    def __init__(self, n, edges, *, root=None, parent=None, bfs_position=None,
                 degrees=None, check=True):
        n = int(n)
        if n < 1:
            raise InvalidTreeError("a tree needs at least one vertex")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if check:
            _validate_edges(n, edges)
        if degrees is None:
            degrees = np.bincount(edges.ravel(), minlength=n)
        degrees = np.asarray(degrees, dtype=np.int64)
        for arr in (edges, degrees):
            arr.setflags(write=False)
        self._n = n
        self._edges = edges
        self._degrees = degrees
        self._root = None if root is None else int(root)
        self._parent = _frozen(parent)
        self._bfs_position = _frozen(bfs_position)
        self._identity_order = False

    @classmethod
    def _from_parents(cls, parent: np.ndarray, degrees: np.ndarray, root: int = 0) -> "Tree":
        # rooted tree whose vertex numbering is already a BFS order; the arrays
        # are taken over as they are and the edge array is built on first use
        self = cls.__new__(cls)
        for arr in (parent, degrees):
            arr.setflags(write=False)
        self._n = len(parent)
        self._edges = None
        self._degrees = degrees
        self._root = root
        self._parent = parent
        self._bfs_position = None
        self._identity_order = True
        return self

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]], n: int | None = None) -> "Tree":
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if n is None:
            n = len(edges) + 1
        return cls(n, edges)

    # -- basic data --------------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> np.ndarray:
        if self._edges is None:
            child = np.arange(self._n, dtype=np.int64)
            child = child[child != self._root]
            edges = np.stack((self._parent[child], child), axis=1)
            edges.setflags(write=False)
            self._edges = edges
        return self._edges

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    @property
    def root(self):
        return self._root

    @property
    def parent(self):
        return self._parent

    @property
    def bfs_position(self):
        if self._bfs_position is None and self._identity_order:
            self._bfs_position = _frozen(np.arange(self._n))
        return self._bfs_position

    def degree(self, v: int) -> int:
        return int(self._degrees[v])

    def degree_sequence(self) -> DegreeSequence:
        return DegreeSequence(self._degrees)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Sorted neighbor tuples per vertex."""
        nbrs: list[list[int]] = [[] for _ in range(self._n)]
        for u, v in self.edges.tolist():
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @cached_property
    def _edge_keys(self) -> frozenset:
        return frozenset((min(u, v), max(u, v)) for u, v in self.edges.tolist())

    def edge_list(self) -> list[tuple[int, int]]:
        """Edges as ``(min, max)`` pairs, sorted lexicographically."""
        return sorted(self._edge_keys)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._edge_keys

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return self._n == other._n and self._edge_keys == other._edge_keys

    def __hash__(self):
        return hash((self._n, self._edge_keys))

    def __repr__(self):
        return f"Tree(n={self._n}, edges={self.edge_list()!r})"

    # -- traversal ---------------------------------------------------------

    def bfs_parents(self, root: int) -> tuple[list[int], list[int]]:
        """Return ``(order, parent)`` of a breadth-first search from ``root``.

        Neighbors are visited in increasing index order.
        """
        adj = self.adjacency
        parent = [-1] * self._n
        seen = [False] * self._n
        seen[root] = True
        order = [root]
        head = 0
        while head < len(order):
            x = order[head]
            head += 1
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    parent[y] = x
                    order.append(y)
        return order, parent

    def rooted(self, root: int) -> "Tree":
        """Copy of this tree with parent pointers and BFS ranks from ``root``."""
        order, parent = self.bfs_parents(root)
        rank = np.empty(self._n, dtype=np.int64)
        rank[order] = np.arange(self._n)
        return Tree(self._n, self.edges, root=root, parent=parent,
                    bfs_position=rank, degrees=self._degrees, check=False)

    def layers(self) -> np.ndarray:
        """Distance of every vertex from ``root`` (the tree must be rooted)."""
        if self._root is None:
            raise InvalidTreeError("tree is not rooted")
        order, parent = self.bfs_parents(self._root)
        layer = np.zeros(self._n, dtype=np.int64)
        for v in order[1:]:
            layer[v] = layer[parent[v]] + 1
        return layer

    def children(self, v: int) -> list[int]:
        if self._parent is None:
            raise InvalidTreeError("tree is not rooted")
        p = self._parent[v]
        return [w for w in self.adjacency[v] if w != p]

    def path(self, u: int, v: int) -> list[int]:
        """Vertices of the geodesic from ``u`` to ``v``, both ends included."""
        if u == v:
            return [u]
        _, parent = self.bfs_parents(v)
        out = [u]
        while out[-1] != v:
            out.append(parent[out[-1]])
        return out

    def bipartition(self) -> np.ndarray:
        """``+1`` / ``-1`` per vertex by parity of distance from vertex 0."""
        order, parent = self.bfs_parents(0)
        sign = np.ones(self._n, dtype=np.int64)
        for v in order[1:]:
            sign[v] = -sign[parent[v]]
        return sign

    def relabel(self, perm: Sequence[int]) -> "Tree":
        """Tree with vertex ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self._n)):
            raise InvalidTreeError("relabeling is not a permutation")
        return Tree(self._n, perm[self.edges], check=False)

    # -- serialization -----------------------------------------------------

    def to_edgelist(self) -> str:
        """One ``"u v"`` line per edge, sorted; byte-deterministic."""
        return "".join(f"{u} {v}\n" for u, v in self.edge_list())

    def to_dot(self, name: str = "T") -> str:
        lines = [f"graph {name} {{"]
        lines += [f"  {v};" for v in range(self._n)]
        lines += [f"  {u} -- {v};" for u, v in self.edge_list()]
        lines.append("}")
        return "\n".join(lines) + "\n"


def _frozen(a):
    if a is None:
        return None
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def _validate_edges(n: int, edges: np.ndarray) -> None:
    if len(edges) != n - 1:
        raise InvalidTreeError(f"a tree on {n} vertices has {n - 1} edges, got {len(edges)}")
    if n == 1:
        return
    if edges.min() < 0 or edges.max() >= n:
        raise InvalidTreeError("vertex index out of range")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise InvalidTreeError("self loop")
    adj = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise InvalidTreeError("edges do not connect all vertices")


def read_edgelist(text: str, n: int | None = None) -> Tree:
    """Parse the ``"u v"`` per line format; ``#`` starts a comment."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidTreeError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise InvalidTreeError(f"line {lineno}: non-integer vertex in {line!r}") from None
    if n is None:
        n = len(edges) + 1
    return Tree(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2))


# -- BFD trees ---------------------------------------------------------------


def build_bfd_tree(pi: DegreeSequence) -> Tree:
    """Realize a tree sequence as the BFD-tree whose identity order is BFD.

    Vertex 0 takes the next ``pi[0]`` vertices as children and every later
    vertex ``i`` takes the next ``pi[i] - 1``. Since children are assigned in
    one left-to-right pass, the parent array is a ``repeat`` of the vertex
    indices and the whole construction is linear in ``n``.

    >>> build_bfd_tree(DegreeSequence([2, 2, 1, 1])).edge_list()
    [(0, 1), (0, 2), (1, 3)]
    """
    if not isinstance(pi, DegreeSequence):
        pi = DegreeSequence(pi)
    if not is_tree_sequence(pi):
        raise InvalidSequenceError(f"{pi} is not a tree sequence")
    n = pi.n
    deg = pi.array
    if n == 1:
        return Tree(1, np.empty((0, 2), dtype=np.int64), root=0, parent=[-1],
                    bfs_position=[0], degrees=deg, check=False)
    counts = deg - 1
    counts[0] = deg[0]
    parent = np.empty(n, dtype=np.int64)
    parent[0] = -1
    parent[1:] = np.repeat(np.arange(n, dtype=np.int64), counts)
    return Tree._from_parents(parent, deg)


def _check_rank(n: int, rank) -> np.ndarray:
    rank = np.asarray(rank, dtype=np.int64)
    if rank.shape != (n,) or not np.array_equal(np.sort(rank), np.arange(n)):
        raise ValueError("ordering is not a permutation of the vertices")
    return rank


def is_bfd_ordering(t: Tree, rank) -> bool:
    """Check whether ``rank`` (vertex -> position) is a BFD-ordering of ``t``.

    The root is the vertex at position 0. The order must be breadth-first
    with children blocks following their parents' order, and degrees must be
    non-increasing along it.
    """
    rank = _check_rank(t.n, rank)
    order = np.argsort(rank)
    deg = t.degrees[order]
    if np.any(deg[1:] > deg[:-1]):
        return False
    _, parent = t.bfs_parents(int(order[0]))
    prank = [int(rank[parent[v]]) for v in order[1:].tolist()]
    for i, p in enumerate(prank, 1):
        if p >= i:
            return False
    return all(a <= b for a, b in zip(prank, prank[1:]))


def has_bfd_ordering(t: Tree):
    """Search exhaustively for a BFD-ordering; return its rank array or ``None``.

    Roots are restricted to maximum-degree vertices. At each dequeued vertex the
    children must fill the next block of the globally sorted degree list, so the
    only freedom is the arrangement of equal-degree siblings; siblings heading
    isomorphic subtrees are interchangeable and are not permuted among
    themselves.
    """
    n = t.n
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    deg = t.degrees.tolist()
    target = sorted(deg, reverse=True)
    for r in (v for v in range(n) if deg[v] == target[0]):
        order = _bfd_search_from(t, r, deg, target)
        if order is not None:
            rank = np.empty(n, dtype=np.int64)
            rank[order] = np.arange(n)
            return rank
    return None


def _bfd_search_from(t: Tree, root: int, deg: list[int], target: list[int]):
    n = t.n
    bfs, parent = t.bfs_parents(root)
    adj = t.adjacency
    kids = [[w for w in adj[v] if w != parent[v]] for v in range(n)]
    codes = _subtree_codes(bfs, kids)

    def arrangements(children):
        # only distinct sequences of subtree codes are tried within a degree
        per_group = []
        for d in sorted({deg[c] for c in children}, reverse=True):
            pools: dict[bytes, list[int]] = {}
            for c in children:
                if deg[c] == d:
                    pools.setdefault(codes[c], []).append(c)
            options = []
            for keys in _distinct_orders(sorted(k for k, m in pools.items() for _ in m)):
                taken = {k: iter(m) for k, m in pools.items()}
                options.append([next(taken[k]) for k in keys])
            per_group.append(options)
        result = [[]]
        for options in per_group:
            result = [a + b for a in result for b in options]
        return result

    order = [root]

    def search(head: int) -> bool:
        while head < len(order):
            x = order[head]
            children = kids[x]
            size = len(order)
            want = target[size:size + len(children)]
            if sorted((deg[c] for c in children), reverse=True) != want:
                return False
            options = arrangements(children) if children else [[]]
            if len(options) == 1:
                order.extend(options[0])
                head += 1
                continue
            for opt in options:
                del order[size:]
                order.extend(opt)
                if search(head + 1):
                    return True
            del order[size:]
            return False
        return len(order) == n

    return order if search(0) else None


def _distinct_orders(items: list) -> Iterator[list]:
    # distinct permutations of a sorted list, lexicographically
    a = list(items)
    while True:
        yield list(a)
        i = len(a) - 2
        while i >= 0 and a[i] >= a[i + 1]:
            i -= 1
        if i < 0:
            return
        j = len(a) - 1
        while a[j] <= a[i]:
            j -= 1
        a[i], a[j] = a[j], a[i]
        a[i + 1:] = reversed(a[i + 1:])


def _subtree_codes(bfs_order: list[int], kids: list[list[int]]) -> list[bytes]:
    code: list[bytes] = [b""] * len(kids)
    for v in reversed(bfs_order):
        code[v] = b"(" + b"".join(sorted(code[c] for c in kids[v])) + b")"
    return code


# -- Pruefer codes -------------------------------------------------------------


def prufer_decode(code: Sequence[int], n: int | None = None) -> Tree:
    """Labeled tree with the given Pruefer code (smallest-leaf convention).

    >>> prufer_decode([1, 2]).edge_list()
    [(0, 1), (1, 2), (2, 3)]
    """
    code = [int(x) for x in code]
    if n is None:
        n = len(code) + 2
    if n < 2 or len(code) != n - 2:
        raise InvalidTreeError(f"code of length {len(code)} does not fit n={n}")
    if any(x < 0 or x >= n for x in code):
        raise InvalidTreeError("Pruefer code entry out of range")
    return Tree(n, _prufer_edges(code, n), check=False)


def _prufer_edges(code: list[int], n: int) -> np.ndarray:
    degree = [1] * n
    for x in code:
        degree[x] += 1
    edges = np.empty((n - 1, 2), dtype=np.int64)
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i, x in enumerate(code):
        edges[i, 0] = leaf
        edges[i, 1] = x
        degree[x] -= 1
        if degree[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    edges[n - 2, 0] = leaf
    edges[n - 2, 1] = n - 1
    return edges


def prufer_encode(t: Tree) -> list[int]:
    """Pruefer code of a labeled tree; inverse of :func:`prufer_decode`."""
    n = t.n
    if n < 2:
        raise InvalidTreeError("Pruefer codes need n >= 2")
    _, parent = t.bfs_parents(n - 1)
    degree = t.degrees.tolist()
    code = []
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for _ in range(n - 2):
        x = parent[leaf]
        code.append(x)
        degree[x] -= 1
        if degree[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    return code


# -- canonical forms ------------------------------------------------------------


def tree_centers(t: Tree) -> list[int]:
    """The one or two middle vertices of every longest path."""
    n = t.n
    if n <= 2:
        return list(range(n))
    deg = t.degrees.tolist()
    adj = t.adjacency
    layer = [v for v in range(n) if deg[v] == 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for w in adj[v]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    return sorted(layer)


def rooted_canonical_code(t: Tree, root: int) -> bytes:
    """AHU parenthesis code of ``t`` rooted at ``root``."""
    bfs, parent = t.bfs_parents(root)
    adj = t.adjacency
    kids = [[w for w in adj[v] if w != parent[v]] for v in range(t.n)]
    return _subtree_codes(bfs, kids)[root]


def canonical_code(t: Tree) -> bytes:
    """Isomorphism certificate: the smallest center-rooted AHU code.

    Two trees receive equal codes exactly when they are isomorphic.
    """
    return min(rooted_canonical_code(t, c) for c in tree_centers(t))


# -- small constructors ---------------------------------------------------------


def path_tree(n: int) -> Tree:
    return Tree(n, [(i, i + 1) for i in range(n - 1)])


def star_tree(n: int, center: int = 0) -> Tree:
    """Star ``K_{1,n-1}`` with the given center."""
    return Tree(n, [(center, v) for v in range(n) if v != center])


def spider_tree(legs: Sequence[int]) -> Tree:
    """Center 0 with one path of each given length attached."""
    edges = []
    nxt = 1
    for length in legs:
        prev = 0
        for _ in range(length):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
    return Tree(nxt, edges)


def spider_legs(t: Tree):
    """Sorted leg lengths if ``t`` is a spider (at most one vertex of degree > 2), else ``None``."""
    deg = t.degrees
    hubs = np.flatnonzero(deg > 2)
    if len(hubs) > 1:
        return None
    if len(hubs) == 0:
        # a path: any interior vertex may serve as the center, take the middle one
        if t.n <= 2:
            return [t.n - 1] if t.n == 2 else []
        return [(t.n - 1) // 2, t.n // 2]
    center = int(hubs[0])
    adj = t.adjacency
    legs = []
    for first in adj[center]:
        prev, cur, length = center, first, 1
        while deg[cur] == 2:
            nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
            prev, cur = cur, nxt
            length += 1
        legs.append(length)
    return sorted(legs)


def random_tree(n: int, rng: np.random.Generator) -> Tree:
    """Uniformly random labeled tree via a random Pruefer code."""
    if n == 1:
        return Tree(1, np.empty((0, 2), dtype=np.int64))
    if n == 2:
        return Tree(2, [(0, 1)])
    return prufer_decode(rng.integers(0, n, size=n - 2).tolist(), n)
