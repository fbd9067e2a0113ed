"""Edge rearrangements that raise the largest Laplacian eigenvalue.

Two moves are provided. *Switching* exchanges the far endpoints of two edges,
``u1v1, u2v2 -> u1v2, u2v1``, and keeps every degree. *Shifting* moves edges
``ux_1..ux_k`` over to ``v``. With ``f`` a top eigenvector, switching does not
decrease the eigenvalue when ``|f(u1)| >= |f(u2)|`` and ``|f(v2)| >= |f(v1)|``
(strictly if either is strict), and shifting strictly increases it when
``|f(u)| <= |f(v)|``.

``improve_once`` looks for the first place where the eigenvector-driven
vertex order stops being breadth-first with non-increasing degrees and repairs
it with one such move; ``local_search`` iterates to the fixpoint, which is the
BFD-tree of the degree class. ``majorization_chain`` walks from the BFD-tree of
one sequence to a tree of a prefix-sum-larger sequence, one edge at a time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Sequence

import numpy as np

from .degseq import DegreeSequence, Majorization, is_tree_sequence, majorization_compare
from .exceptions import (BudgetExceededError, InvalidMoveError, InvalidSequenceError,
                         VerificationAnomaly)
from .spectral import max_laplacian_eigenpair, rayleigh_quotient, eigen_residual
from .tree import Tree, build_bfd_tree, is_bfd_ordering

__all__ = [
    "RearrangeStep",
    "PrecOrdering",
    "switch_edges",
    "shift_edges",
    "prec_ordering",
    "improve_once",
    "local_search",
    "majorization_chain",
    "strict_margin",
]

TIE_TOL = 1e-7


def strict_margin(lam: float) -> float:
    """Smallest increase counted as strict: ``1e-10 * max(1, lam)``."""
    return 1e-10 * max(1.0, lam)


@dataclass(frozen=True)
class RearrangeStep:
    kind: str  # "switch", "shift" or "add_pendant"
    removed: tuple[tuple[int, int], ...]
    added: tuple[tuple[int, int], ...]
    lambda_before: float
    lambda_after: float
    reason: str = ""

    @property
    def increase(self) -> float:
        return self.lambda_after - self.lambda_before

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "removed": [list(e) for e in self.removed],
            "added": [list(e) for e in self.added],
            "lambda_before": float(f"{self.lambda_before:.17g}"),
            "lambda_after": float(f"{self.lambda_after:.17g}"),
            "reason": self.reason,
        }


def steps_to_json(steps: Sequence[RearrangeStep]) -> str:
    return json.dumps([s.to_dict() for s in steps])


@dataclass(frozen=True)
class PrecOrdering:
    """Vertex order by decreasing ``|f|``, then degree, then earliest placed neighbor."""

    rank: np.ndarray = field(repr=False)
    root: int
    tie_class: np.ndarray = field(repr=False)

    @property
    def order(self) -> np.ndarray:
        return np.argsort(self.rank)


def _key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


# -- moves -----------------------------------------------------------------


def switch_edges(t: Tree, e1: Sequence[int], e2: Sequence[int]) -> Tree:
    """Replace ``u1v1`` and ``u2v2`` by ``u1v2`` and ``u2v1``.

    ``e1 = (u1, v1)`` and ``e2 = (u2, v2)`` are oriented. The path from ``v1``
    to ``v2`` must avoid ``u1`` and ``u2``; otherwise the result would not be a
    tree and :class:`InvalidMoveError` is raised.
    """
    u1, v1 = (int(x) for x in e1)
    u2, v2 = (int(x) for x in e2)
    for u, v in ((u1, v1), (u2, v2)):
        if not t.has_edge(u, v):
            raise InvalidMoveError(f"edge {u}-{v} is not in the tree")
    if _key(u1, v1) == _key(u2, v2):
        raise InvalidMoveError("the two edges must be distinct")
    if v1 == v2:
        raise InvalidMoveError(f"both edges end at {v1}; the switch would change nothing")
    p = t.path(v1, v2)
    if u1 in p or u2 in p:
        raise InvalidMoveError(f"path {v1}..{v2} passes through {u1} or {u2}")
    drop = {_key(u1, v1), _key(u2, v2)}
    edges = [e for e in t.edge_list() if e not in drop]
    edges += [_key(u1, v2), _key(u2, v1)]
    return Tree(t.n, edges)


def shift_edges(t: Tree, u: int, v: int, xs: Sequence[int]) -> Tree:
    """Move the edges ``u x`` for ``x`` in ``xs`` over to ``v``.

    None of the ``x`` may lie on the path from ``u`` to ``v``.
    """
    u, v = int(u), int(v)
    xs = [int(x) for x in xs]
    if u == v:
        raise InvalidMoveError("shift needs two different vertices")
    if not xs:
        raise InvalidMoveError("nothing to shift")
    if len(set(xs)) != len(xs):
        raise InvalidMoveError("repeated vertex in shift list")
    p = set(t.path(u, v))
    for x in xs:
        if not t.has_edge(u, x):
            raise InvalidMoveError(f"edge {u}-{x} is not in the tree")
        if x in p:
            raise InvalidMoveError(f"{x} lies on the path {u}..{v}")
    drop = {_key(u, x) for x in xs}
    edges = [e for e in t.edge_list() if e not in drop]
    edges += [_key(v, x) for x in xs]
    return Tree(t.n, edges)


# -- eigenvector ordering ---------------------------------------------------


def _tie_classes(absf: np.ndarray, tie_tol: float) -> np.ndarray:
    # consecutive |f| values closer than tie_tol * max|f| share a class; class 0 is largest
    order = np.argsort(-absf, kind="stable")
    cls = np.empty(len(absf), dtype=np.int64)
    scale = absf.max() if len(absf) else 1.0
    c = 0
    for i, v in enumerate(order):
        if i and absf[order[i - 1]] - absf[v] > tie_tol * scale:
            c += 1
        cls[v] = c
    return cls


def prec_ordering(t: Tree, f, *, tie_tol: float = TIE_TOL, check_tol: float | None = 1e-8) -> PrecOrdering:
    """Order vertices by decreasing ``|f|``, then decreasing degree.

    Remaining ties go to the vertex with the earliest already placed neighbor,
    then to the smaller index. ``|f|`` values within ``tie_tol * max|f|`` count
    as equal. If ``check_tol`` is set, ``f`` must satisfy the eigenvalue
    equation to that relative accuracy.
    """
    f = np.asarray(f, dtype=np.float64)
    if check_tol is not None and t.n > 1:
        lam = rayleigh_quotient(t, f)
        if eigen_residual(t, lam, f / np.linalg.norm(f)) > check_tol * max(1.0, lam):
            raise ValueError("vertex function is not a converged eigenvector")
    absf = np.abs(f)
    cls = _tie_classes(absf, tie_tol)
    deg = t.degrees
    adj = t.adjacency
    n = t.n
    buckets: dict[tuple[int, int], list[int]] = {}
    for v in range(n):
        buckets.setdefault((int(cls[v]), -int(deg[v])), []).append(v)
    rank = np.full(n, -1, dtype=np.int64)
    pos = 0
    for key in sorted(buckets):
        members = buckets[key]
        while members:
            best = min(members, key=lambda v: (_placed_neighbor(v, adj, rank, n), v))
            members.remove(best)
            rank[best] = pos
            pos += 1
    rank.setflags(write=False)
    return PrecOrdering(rank, int(np.argmin(rank)), cls)


def _placed_neighbor(v, adj, rank, n):
    placed = [rank[w] for w in adj[v] if rank[w] >= 0]
    return min(placed) if placed else n


# -- local improvement --------------------------------------------------------


def _eig(t: Tree):
    return max_laplacian_eigenpair(t)


def _bfs_by_rank(t: Tree, root: int, rank: np.ndarray):
    adj = t.adjacency
    parent = [-1] * t.n
    seen = [False] * t.n
    seen[root] = True
    seq = [root]
    head = 0
    while head < len(seq):
        x = seq[head]
        head += 1
        for y in sorted((y for y in adj[x] if not seen[y]), key=lambda y: rank[y]):
            seen[y] = True
            parent[y] = x
            seq.append(y)
    return seq, parent


def _off_path_neighbors(t: Tree, u: int, v: int) -> list[int]:
    p = t.path(u, v)
    return [x for x in t.adjacency[u] if x != p[1]]


def _subtree_size(t: Tree, x: int, away_from: int) -> int:
    adj = t.adjacency
    seen = {x, away_from}
    stack = [x]
    size = 0
    while stack:
        y = stack.pop()
        size += 1
        for z in adj[y]:
            if z not in seen:
                seen.add(z)
                stack.append(z)
    return size


def _candidate_moves(t: Tree, f: np.ndarray, prec: PrecOrdering, deg):
    """Yield ``(reason, kind, args)`` for the repair prescribed by the ordering, then fallbacks."""
    cls = prec.tie_class
    order = prec.order.tolist()
    rank = prec.rank
    n = t.n

    # degrees must not increase along the order
    for i, v in enumerate(order):
        later = order[i + 1:]
        if not later:
            break
        u = max(later, key=lambda w: (deg[w], -rank[w]))
        if deg[u] > deg[v]:
            k = int(deg[u] - deg[v])
            xs = sorted(_off_path_neighbors(t, u, v), key=lambda x: -rank[x])[:k]
            yield "degree-order", "shift", (u, v, xs)
            break

    seq, parent = _bfs_by_rank(t, order[0], rank)
    k = next((i for i in range(n) if seq[i] != order[i]), None)
    if k is not None:
        vk, vm = order[k], seq[k]
        wk, wm = parent[vk], parent[vm]
        if cls[vk] < cls[vm]:
            p = t.path(wm, wk)
            if vk not in p and vm not in p:
                yield "case-1", "switch", ((wm, vm), (wk, vk))
            elif vm in p:
                kids = [c for c in t.adjacency[vk] if c != wk and cls[c] >= cls[wm]]
                for uk in sorted(kids, key=lambda c: -rank[c]):
                    yield "case-2", "switch", ((wm, vm), (uk, vk))
        elif deg[vk] > deg[vm]:
            kk = int(deg[vk] - deg[vm])
            xs = sorted(_off_path_neighbors(t, vk, vm), key=lambda x: -rank[x])[:kk]
            yield "case-3", "shift", (vk, vm, xs)

    # certified moves of either kind, used when the prescribed one is unavailable
    absf = np.abs(f)
    for a, b in t.edge_list():
        for c, d in t.edge_list():
            if (a, b) >= (c, d):
                continue
            for (u1, v1), (u2, v2) in (((a, b), (c, d)), ((b, a), (c, d)),
                                       ((a, b), (d, c)), ((b, a), (d, c)),
                                       ((c, d), (a, b)), ((d, c), (a, b)),
                                       ((c, d), (b, a)), ((d, c), (b, a))):
                if cls[u1] <= cls[u2] and cls[v2] <= cls[v1] and (
                        cls[u1] < cls[u2] or cls[v2] < cls[v1]):
                    yield "certified-switch", "switch", ((u1, v1), (u2, v2))
    for u in range(n):
        for v in range(n):
            if u != v and deg[u] > deg[v] and absf[u] <= absf[v]:
                kk = int(deg[u] - deg[v])
                xs = _off_path_neighbors(t, u, v)[:kk]
                yield "certified-shift", "shift", (u, v, xs)


def improve_once(t: Tree, *, tie_tol: float = TIE_TOL):
    """One eigenvalue-increasing, degree-preserving repair step, or ``None``.

    Returns ``(new_tree, step)``; ``None`` means the eigenvector order of ``t``
    already is a BFD-ordering.

    Raises
    ------
    VerificationAnomaly
        The tree is not BFD-ordered but no move achieved a strict increase.
    """
    if t.n <= 2:
        return None
    res = _eig(t)
    f, lam = res.eigenvector, res.lam
    prec = prec_ordering(t, f, tie_tol=tie_tol)
    if is_bfd_ordering(t, prec.rank):
        return None
    deg = t.degrees
    margin = strict_margin(lam)
    tried = []
    for reason, kind, args in _candidate_moves(t, f, prec, deg):
        try:
            if kind == "switch":
                (u1, v1), (u2, v2) = args
                new = switch_edges(t, (u1, v1), (u2, v2))
                removed = (_key(u1, v1), _key(u2, v2))
                added = (_key(u1, v2), _key(u2, v1))
            else:
                u, v, xs = args
                new = shift_edges(t, u, v, xs)
                removed = tuple(_key(u, x) for x in xs)
                added = tuple(_key(v, x) for x in xs)
        except InvalidMoveError as exc:
            tried.append((reason, args, str(exc)))
            continue
        lam_new = _eig(new).lam
        if lam_new > lam + margin:
            return new, RearrangeStep(kind, removed, added, lam, lam_new, reason)
        tried.append((reason, args, lam_new - lam))
    raise VerificationAnomaly(
        "tree is not BFD-ordered but no rearrangement increased the eigenvalue",
        witness={"edges": t.edge_list(), "tried": tried[:10]})


def local_search(t: Tree, max_steps: int | None = None, *, tie_tol: float = TIE_TOL):
    """Apply :func:`improve_once` until it returns ``None``.

    Returns ``(tree, steps)``. Raises :class:`BudgetExceededError` after
    ``max_steps`` (default ``10 n**2``) steps, with ``(tree, steps)`` attached.
    """
    if max_steps is None:
        max_steps = 10 * t.n * t.n
    steps: list[RearrangeStep] = []
    cur = t
    while True:
        out = improve_once(cur, tie_tol=tie_tol)
        if out is None:
            return cur, steps
        if len(steps) >= max_steps:
            raise BudgetExceededError(f"local search exceeded {max_steps} steps",
                                      partial=(cur, steps))
        cur, step = out
        steps.append(step)


# -- majorization chain -------------------------------------------------------


def majorization_chain(pi: DegreeSequence, pi_prime: DegreeSequence):
    """Trees from BFD(``pi``) to a tree with degree sequence ``pi_prime``.

    Each step either shifts one edge from a vertex whose degree is above its
    target onto a vertex whose degree is below it, or, when no such shift
    keeps the prefix sums under those of ``pi_prime``, hangs a new leaf on the
    vertex being raised. Returns a list of ``(tree_after, step)``.

    If the eigenvector does not certify any shift (the vertex losing the edge
    has larger ``|f|`` than the one gaining it), degree-preserving
    :func:`improve_once` steps are inserted first; they keep the degree
    sequence and carry a reason other than ``"majorization"``.
    """
    for s in (pi, pi_prime):
        if not is_tree_sequence(s):
            raise InvalidSequenceError(f"{s} is not a tree sequence")
    rel = majorization_compare(pi, pi_prime)
    if rel is not Majorization.LESS:
        raise InvalidSequenceError(f"{pi} is not below {pi_prime} (relation {rel.value})")
    target = list(pi_prime.degrees)
    cur = build_bfd_tree(pi)
    res = _eig(cur)
    chain = []
    guard = 4 * (sum(target) + len(target)) + 10
    while sorted(cur.degrees.tolist(), reverse=True) != target:
        guard -= 1
        if guard < 0:
            raise VerificationAnomaly("majorization chain did not terminate",
                                      witness={"edges": cur.edge_list()})
        deg = cur.degrees
        s = sorted(deg.tolist(), reverse=True)
        k = next(i for i in range(len(s)) if target[i] > s[i])
        S = list(accumulate(s))
        P = list(accumulate(target))
        l = next((j for j in range(k + 1, len(s)) if S[j] == P[j]), None)
        f = np.abs(res.eigenvector)
        lam = res.lam
        raise_cands = [v for v in range(cur.n) if deg[v] == s[k]]
        v = max(raise_cands, key=lambda x: (f[x], -x))
        if l is None:
            m = cur.n
            new = Tree(m + 1, [*cur.edge_list(), (v, m)])
            step_kind, removed, added = "add_pendant", (), ((v, m),)
        else:
            lower = [u for u in range(cur.n) if deg[u] == s[l] and u != v]
            u = min(lower, key=lambda x: (f[x], x))
            if f[u] > f[v] * (1 + TIE_TOL):
                # no certificate on this tree; repair it inside its class first
                out = improve_once(cur)
                if out is None:
                    raise VerificationAnomaly("no certified shift on a BFD-tree",
                                              witness={"edges": cur.edge_list()})
                cur = out[0]
                chain.append(out)
                res = _eig(cur)
                continue
            xs = _off_path_neighbors(cur, u, v)
            x = min(xs, key=lambda y: (_subtree_size(cur, y, u), y))
            new = shift_edges(cur, u, v, [x])
            step_kind, removed, added = "shift", (_key(u, x),), (_key(v, x),)
        res_new = _eig(new)
        if not res_new.lam > lam + strict_margin(lam):
            raise VerificationAnomaly(
                f"{step_kind} did not increase the eigenvalue strictly",
                witness={"edges": cur.edge_list(), "lambda_before": lam,
                         "lambda_after": res_new.lam})
        chain.append((new, RearrangeStep(step_kind, removed, added, lam, res_new.lam,
                                         "majorization")))
        cur, res = new, res_new
    return chain
